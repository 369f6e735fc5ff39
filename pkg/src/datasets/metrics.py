"""
Evaluation metrics, overall and restricted to cliff-flagged molecules.

Reported RMSE uses the exact square root (the training loss adds a small
epsilon; metrics do not).
"""

import math
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from src.core.errors import EmptyStratum, ShapeMismatch, SingleClass


def _pair(pred, target):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction length {pred.size} != target length {target.size}")
    return pred, target


def _restrict(flags, *arrays):
    flags = np.asarray(flags, dtype=bool).reshape(-1)
    if flags.size != arrays[0].size:
        raise ShapeMismatch(f"flags length {flags.size} != data length {arrays[0].size}")
    if not flags.any():
        raise EmptyStratum("no cliff-flagged records to evaluate")
    return tuple(a[flags] for a in arrays)


def rmse(pred, target) -> float:
    pred, target = _pair(pred, target)
    if pred.size == 0:
        raise EmptyStratum("rmse of an empty set")
    return math.sqrt(float(np.mean((pred - target) ** 2)))


def mae(pred, target) -> float:
    pred, target = _pair(pred, target)
    if pred.size == 0:
        raise EmptyStratum("mae of an empty set")
    return float(np.mean(np.abs(pred - target)))


def cliff_rmse(pred, target, flags) -> float:
    pred, target = _pair(pred, target)
    return rmse(*_restrict(flags, pred, target))


def cliff_mae(pred, target, flags) -> float:
    pred, target = _pair(pred, target)
    return mae(*_restrict(flags, pred, target))


def roc_auc(scores, labels) -> float:
    """Mann-Whitney statistic with mid-ranks for ties"""
    scores, labels = _pair(scores, labels)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int((labels == 0).sum())
    if n_pos + n_neg != labels.size:
        raise ValueError("roc_auc labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise SingleClass(f"roc_auc needs both classes, got {n_pos} positive and {n_neg} negative")
    ranks = rankdata(scores, method='average')
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def cliff_roc_auc(scores, labels, flags) -> float:
    scores, labels = _pair(scores, labels)
    return roc_auc(*_restrict(flags, scores, labels))


METRIC_FUNCTIONS = {'rmse': rmse, 'mae': mae, 'roc_auc': roc_auc}


def evaluate(pred: Sequence[float], target: Sequence[float], flags: Optional[Sequence[bool]],
             task: str) -> Dict[str, Optional[float]]:
    """
    Metric block for one split. Cliff metrics (and roc_auc on single-class
    data) are None when undefined.
    """
    pred, target = _pair(pred, target)
    flags = np.zeros(pred.size, dtype=bool) if flags is None else np.asarray(flags, dtype=bool)
    result: Dict[str, Optional[float]] = {'n': int(pred.size), 'n_cliff': int(flags.sum())}

    def guarded(fn, *args):
        try:
            return fn(*args)
        except (EmptyStratum, SingleClass):
            return None

    if task == 'classification':
        result['roc_auc'] = guarded(roc_auc, pred, target)
        result['cliff_roc_auc'] = guarded(cliff_roc_auc, pred, target, flags)
    else:
        result['rmse'] = guarded(rmse, pred, target)
        result['mae'] = guarded(mae, pred, target)
        result['cliff_rmse'] = guarded(cliff_rmse, pred, target, flags)
        result['cliff_mae'] = guarded(cliff_mae, pred, target, flags)
    return result
