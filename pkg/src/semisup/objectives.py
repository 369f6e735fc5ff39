"""
Training objectives.

L_f  = mean H_f over labeled members + lambda * mean H_f over pseudo members
L_g  = class-weighted mean BCE of confidences against the observability mask
"""

from typing import Callable, Optional

import numpy as np

from src.core.errors import EmptyDataset, ShapeMismatch
from src.ndcore import losses
from src.ndcore import tensor as T
from src.ndcore.tensor import Tensor
from src.semisup.hybrid import class_weights


def target_loss(pred: Tensor, targets: np.ndarray, pseudo_mask: np.ndarray, lam: float,
                loss_fn: Callable[[Tensor, Tensor], Tensor]) -> Tensor:
    """Loss of f over a (mini)batch drawn from D''"""
    targets = np.asarray(targets, dtype=np.float64)
    pseudo_mask = np.asarray(pseudo_mask, dtype=bool)
    if pred.size == 0:
        raise EmptyDataset("target loss over an empty set")
    if pred.shape != targets.shape or pseudo_mask.shape != targets.shape:
        raise ShapeMismatch(f"target_loss: pred {pred.shape}, targets {targets.shape}, mask {pseudo_mask.shape}")

    labeled = np.flatnonzero(~pseudo_mask)
    pseudo = np.flatnonzero(pseudo_mask)
    loss: Optional[Tensor] = None
    if labeled.size:
        loss = loss_fn(T.take_rows(pred, labeled), Tensor(targets[labeled]))
    if pseudo.size:
        term = T.mul(loss_fn(T.take_rows(pred, pseudo), Tensor(targets[pseudo])), lam)
        loss = term if loss is None else T.add(loss, term)
    return loss


def instructor_loss(p: Tensor, c: np.ndarray, weights: Optional[np.ndarray] = None) -> Tensor:
    """Weighted BCE; weights default to the balanced class weights of c"""
    c = np.asarray(c, dtype=np.float64)
    if weights is None:
        weights = class_weights(c)
    return losses.bce(p, Tensor(c), weights)


def consistency_loss(first: Tensor, second: Tensor) -> Tensor:
    """Mean squared difference between two stochastic forward passes"""
    return T.mean(T.square(T.sub(first, second)))
