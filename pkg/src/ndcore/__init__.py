"""
Numeric core: tensors, tape-based reverse-mode autodiff, losses, Adam,
finite-difference gradient checking and named RNG streams.
"""

from .tensor import (
    Tensor, Tape, as_tensor, backward, current_tape,
    add, sub, mul, matmul, spmm, relu, sigmoid, exp, log, sqrt, square,
    absolute, clip, softplus, sum, mean, concat, reshape, take_rows,
    segment_softmax, dropout,
)
from .losses import (
    bce, bce_with_logits, mse, rmse, mae, per_sample_loss, target_loss_fn,
    BCE_EPS, RMSE_EPS,
)
from .optim import OptimizerState, adam_step
from .gradcheck import grad_check
from .random import RngStreams, STREAMS

__all__ = [
    'Tensor', 'Tape', 'as_tensor', 'backward', 'current_tape',
    'add', 'sub', 'mul', 'matmul', 'spmm', 'relu', 'sigmoid', 'exp', 'log', 'sqrt',
    'square', 'absolute', 'clip', 'softplus', 'sum', 'mean', 'concat', 'reshape',
    'take_rows', 'segment_softmax', 'dropout',
    'bce', 'bce_with_logits', 'mse', 'rmse', 'mae', 'per_sample_loss', 'target_loss_fn',
    'BCE_EPS', 'RMSE_EPS',
    'OptimizerState', 'adam_step',
    'grad_check',
    'RngStreams', 'STREAMS',
]
