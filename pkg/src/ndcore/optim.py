"""
Adam optimizer.

State is kept per parameter name so moments line up with the parameter
dictionaries the models expose (declaration order, stable across runs).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from src.core.errors import ShapeMismatch
from src.ndcore.tensor import Tensor


@dataclass
class OptimizerState:
    """Moments, step count and hyperparameters for one parameter tree"""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray],
              state: OptimizerState) -> Mapping[str, Tensor]:
    """Bias-corrected Adam update applied in place; returns params"""
    if set(params) != set(grads):
        missing = sorted(set(params) ^ set(grads))
        raise ShapeMismatch(f"params and grads disagree on names: {missing}")

    for name, p in params.items():
        g = grads[name]
        if g.shape != p.data.shape:
            raise ShapeMismatch(f"grad for {name} has shape {g.shape}, parameter has {p.data.shape}")
        if name in state.m and state.m[name].shape != p.data.shape:
            raise ShapeMismatch(f"moment for {name} has shape {state.m[name].shape}, parameter has {p.data.shape}")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    step_size = state.lr / bc1

    for name, p in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)

        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        denom = np.sqrt(v * (1.0 / bc2)) + state.eps
        p.data -= step_size * m / denom

    logging.debug(f"[ADAM] step {state.step} over {len(params)} tensors")
    return params
