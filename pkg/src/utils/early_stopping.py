"""
Early stopping for the warm-up phase.

Tracks the best validation score, counts epochs without improvement and
trips once the count reaches the patience limit.
"""

import logging
import math
from typing import Optional


class EarlyStopping:
    """Patience counter over a validation metric"""

    def __init__(self, patience: int = 10, lower_is_better: bool = True):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got: {patience}")
        self.patience = patience
        self.lower_is_better = lower_is_better
        self.best_score: Optional[float] = None
        self.best_epoch: Optional[int] = None
        self.bad_epochs = 0
        self.tripped = False

    def is_better(self, score: float) -> bool:
        if not math.isfinite(score):
            return False
        if self.best_score is None:
            return True
        return score < self.best_score if self.lower_is_better else score > self.best_score

    def record(self, epoch: int, score: float) -> bool:
        """Record a score; returns True when it is a new best"""
        if self.is_better(score):
            self.best_score = score
            self.best_epoch = epoch
            self.bad_epochs = 0
            return True

        self.bad_epochs += 1
        if self.bad_epochs >= self.patience:
            self.tripped = True
            logging.info(f"[WARMUP] Early stopping at epoch {epoch} - no improvement for {self.bad_epochs} epochs "
                         f"(best {self.best_score} at epoch {self.best_epoch})")
        return False

    def should_stop(self) -> bool:
        return self.tripped
