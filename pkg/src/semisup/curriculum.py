"""
Self-adaptive threshold controller and the fixed percentile ramp.

The controller lowers gamma by delta_gamma whenever the validation score
strictly improves on the previous epoch's score (smaller is better after
normalisation), never going below gamma_min.
"""

import logging
import math
from dataclasses import replace

from src.semisup.types import CurriculumState


def curriculum_step(state: CurriculumState, s: float, lower_is_better: bool = True) -> CurriculumState:
    if not math.isfinite(s):
        raise ValueError(f"validation score must be finite, got: {s}")
    score = s if lower_is_better else -s

    gamma = state.gamma
    if state.epoch > 0 and state.s_prev is not None and score < state.s_prev:
        gamma = max(state.gamma - state.delta_gamma, state.gamma_min)
        logging.info(f"[CURRICULUM] epoch {state.epoch}: score improved "
                     f"({state.s_prev:.6g} -> {score:.6g}), gamma {state.gamma:.4f} -> {gamma:.4f}")

    return replace(state, gamma=gamma, s_prev=score, epoch=state.epoch + 1)


def percentile_fraction(epoch: int, epochs: int, start: float = 0.1, end: float = 1.0) -> float:
    """Linear ramp of the admitted fraction from start (first epoch) to end (last epoch)"""
    if epochs <= 1:
        return end
    return start + (end - start) * epoch / (epochs - 1)
