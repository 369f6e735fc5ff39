"""Central finite-difference check of tape gradients"""

from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from src.ndcore.tensor import Tape, Tensor, backward

Params = Union[Mapping[str, Tensor], Sequence[Tensor]]


def grad_check(fn: Callable[[], Tensor], params: Params, h: float = 1e-5,
               tol: Optional[float] = None) -> float:
    """
    Compare tape gradients of a pure scalar function against central differences.

    Returns max over all coordinates of |a - n| / max(|a|, |n|, 1e-8).
    When tol is given the result is also compared and a failing coordinate
    is reported through AssertionError.
    """
    tensors = list(params.values()) if isinstance(params, Mapping) else list(params)

    with Tape() as tape:
        loss = fn()
    analytic = [g.copy() for g in backward(tape, loss, tensors)]

    worst = 0.0
    worst_at = None
    for k, p in enumerate(tensors):
        flat = p.data.reshape(-1)
        a_flat = analytic[k].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = fn().item()
            flat[i] = original - h
            minus = fn().item()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * h)
            a = a_flat[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if err > worst:
                worst = err
                worst_at = (k, i, a, numeric)

    if tol is not None and worst > tol:
        k, i, a, numeric = worst_at
        raise AssertionError(
            f"gradient check failed on tensor {k} coordinate {i}: analytic {a}, numeric {numeric}, "
            f"relative error {worst:.3e} > {tol}"
        )
    return float(worst)
