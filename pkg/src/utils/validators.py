"""
Input validation helpers for the command line surface
"""

import math
from pathlib import Path
from typing import Tuple


def validate_thresholds(sim_threshold: float, potency_threshold: float) -> Tuple[bool, str]:
    """Cliff thresholds: similarity in (0, 1], potency gap > 0"""
    if not (isinstance(sim_threshold, (int, float)) and 0.0 < sim_threshold <= 1.0):
        return False, f"Similarity threshold must be in (0, 1], got: {sim_threshold}"
    if not (isinstance(potency_threshold, (int, float)) and math.isfinite(potency_threshold)
            and potency_threshold > 0.0):
        return False, f"Potency threshold must be > 0, got: {potency_threshold}"
    return True, "OK"


def validate_run_dir(run_dir) -> Tuple[bool, str]:
    """A finished run directory holds metrics.json"""
    path = Path(run_dir)
    if not path.is_dir():
        return False, f"Not a directory: {path}"
    if not (path / 'metrics.json').exists():
        return False, f"No metrics.json in {path}"
    return True, "OK"


def validate_epoch(epoch) -> Tuple[bool, str]:
    if isinstance(epoch, bool) or not isinstance(epoch, int):
        return False, f"Epoch must be an integer, got: {epoch!r}"
    if epoch < 0:
        return False, f"Epoch must be >= 0, got: {epoch}"
    return True, "OK"
