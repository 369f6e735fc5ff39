"""Data types of the semi-supervised training engine"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class PseudoSample:
    """One unlabeled molecule with its current pseudo-label and confidence"""
    index: int               # position in the unlabeled pool
    y_hat: float             # pseudo-label (standardised units / hard class)
    p: float = 0.5           # instructor confidence
    c: int = 0               # observability mask, always 0 for pseudo samples
    epoch_assigned: int = 0


@dataclass(frozen=True)
class HybridSet:
    """Labeled members (c = 1) followed by admitted pseudo members (c = 0)"""
    labeled: Tuple[Any, ...]
    pseudo: Tuple[PseudoSample, ...]

    @property
    def size(self) -> int:
        return len(self.labeled) + len(self.pseudo)

    @property
    def num_labeled(self) -> int:
        return len(self.labeled)

    def observability(self) -> np.ndarray:
        return np.concatenate([np.ones(len(self.labeled)), np.zeros(len(self.pseudo))])

    def pseudo_mask(self) -> np.ndarray:
        return self.observability() == 0


@dataclass(frozen=True)
class CurriculumState:
    """Threshold controller state"""
    gamma: float = 0.9
    delta_gamma: float = 0.05
    k: int = 5
    s_prev: Optional[float] = None
    epoch: int = 0
    gamma_min: float = 0.0


@dataclass
class EpochRecord:
    """One run-log row (f_digest is kept in memory only)"""
    epoch: int
    gamma: float
    hybrid_size: int
    loss_f: float
    loss_g: float
    val_metric: float
    test_metric: float = float('nan')
    wall_ms: Optional[float] = None
    f_digest: str = ''

    def as_row(self) -> Dict[str, Any]:
        return {
            'epoch': self.epoch,
            'gamma': self.gamma,
            'hybrid_size': self.hybrid_size,
            'loss_f': self.loss_f,
            'loss_g': self.loss_g,
            'val_metric': self.val_metric,
            'test_metric': self.test_metric,
            'wall_ms': self.wall_ms,
        }


@dataclass
class TrainResult:
    """Trained parameters, the per-epoch log and final metrics"""
    strategy: str
    target_params: Dict[str, Any]
    instructor_params: Optional[Dict[str, Any]]
    log: List[EpochRecord]
    metrics: Dict[str, Any]
    gamma_final: Optional[float]
    best_epoch: int
    pseudo_pool: Tuple[PseudoSample, ...] = field(default_factory=tuple)
