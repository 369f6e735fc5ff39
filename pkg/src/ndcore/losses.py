"""
Loss functions.

Tensor losses are differentiable and return scalar tensors. The `per_sample_*`
helpers are plain numpy and produce the per-sample H_f values the instructor
consumes as a constant input feature.
"""

from typing import Optional

import numpy as np

from src.core.errors import ShapeMismatch
from src.ndcore import tensor as T
from src.ndcore.tensor import Tensor, as_tensor

BCE_EPS = 1e-7
RMSE_EPS = 1e-12


def _check_pair(pred: Tensor, target: Tensor, name: str):
    if pred.shape != target.shape:
        raise ShapeMismatch(f"{name}: prediction shape {pred.shape} != target shape {target.shape}")


def _weighted_mean(per_elem: Tensor, weights: Optional[np.ndarray]) -> Tensor:
    if weights is None:
        return T.mean(per_elem)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != per_elem.shape:
        raise ShapeMismatch(f"weights shape {weights.shape} != loss shape {per_elem.shape}")
    return T.mean(T.mul(per_elem, weights))


def bce(p, c, weights: Optional[np.ndarray] = None, eps: float = BCE_EPS) -> Tensor:
    """Mean binary cross-entropy of probabilities p against targets c in {0, 1}"""
    p, c = as_tensor(p), as_tensor(c)
    _check_pair(p, c, 'bce')
    pc = T.clip(p, eps, 1.0 - eps)
    per_elem = T.mul(
        T.add(T.mul(c, T.log(pc)), T.mul(T.sub(1.0, c), T.log(T.sub(1.0, pc)))),
        -1.0,
    )
    return _weighted_mean(per_elem, weights)


def bce_with_logits(z, c, weights: Optional[np.ndarray] = None) -> Tensor:
    """BCE on logits: softplus(z) - c*z, stable for large |z|"""
    z, c = as_tensor(z), as_tensor(c)
    _check_pair(z, c, 'bce_with_logits')
    per_elem = T.sub(T.softplus(z), T.mul(c, z))
    return _weighted_mean(per_elem, weights)


def mse(pred, target) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    _check_pair(pred, target, 'mse')
    return T.mean(T.square(T.sub(pred, target)))


def rmse(pred, target, eps: float = RMSE_EPS) -> Tensor:
    """sqrt(MSE + eps); the smoothing keeps the gradient finite at zero error"""
    return T.sqrt(T.add(mse(pred, target), eps))


def mae(pred, target) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    _check_pair(pred, target, 'mae')
    return T.mean(T.absolute(T.sub(pred, target)))


LOSSES = {'mse': mse, 'rmse': rmse, 'mae': mae}


def target_loss_fn(kind: str, task: str):
    """H_f for a task: regression uses `kind`, classification uses CE on logits"""
    if task == 'classification':
        return bce_with_logits
    return LOSSES[kind]


# =============================================================================
# PER-SAMPLE (numpy, no tape)
# =============================================================================

def per_sample_loss(kind: str, task: str, pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Per-sample H_f values; rmse of one sample is its absolute error"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"per_sample_loss: {pred.shape} != {target.shape}")
    if task == 'classification':
        return np.logaddexp(0.0, pred) - target * pred
    diff = pred - target
    if kind == 'mse':
        return diff * diff
    return np.abs(diff)
