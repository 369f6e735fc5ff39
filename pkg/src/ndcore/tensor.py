"""
Dense tensors with tape-based reverse-mode differentiation.

Forward ops run eagerly on float64 numpy arrays. While a Tape is active
(`with Tape() as tape:`) every op that touches a tracked tensor appends a
record (output, inputs, backward closure). `backward(tape, loss)` then walks
the records once in reverse order, accumulating adjoints by tensor identity.

Outside a tape nothing is recorded, which is how eval-mode inference runs.
"""

import logging
import threading
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from src.core.errors import NotScalar, ShapeMismatch

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

# exp() input ceiling and log() input floor keep finite inputs finite
_EXP_MAX = 700.0
_LOG_MIN = 1e-300


class Tensor:
    """float64 array with an optional gradient slot"""

    __slots__ = ('data', 'grad', 'requires_grad', 'tracked', 'name')

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.tracked = requires_grad
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise NotScalar(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


# =============================================================================
# TAPE
# =============================================================================

class _Record:
    __slots__ = ('output', 'inputs', 'backward_fn', 'op')

    def __init__(self, output: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str):
        self.output = output
        self.inputs = inputs
        self.backward_fn = backward_fn
        self.op = op


_local = threading.local()


def _tape_stack() -> List['Tape']:
    if not hasattr(_local, 'stack'):
        _local.stack = []
    return _local.stack


def current_tape() -> Optional['Tape']:
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tape:
    """
    Ordered op log for one forward pass.

    Tapes are per-thread: a worker that evaluates in parallel owns its own
    tape (or none, for inference).
    """

    def __init__(self):
        self.records: List[_Record] = []

    def __enter__(self) -> 'Tape':
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _tape_stack().pop()
        return False

    def __len__(self):
        return len(self.records)

    def record(self, output: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str):
        output.tracked = True
        self.records.append(_Record(output, inputs, backward_fn, op))

    def backward(self, loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> List[np.ndarray]:
        return backward(self, loss, params)


def _emit(data: np.ndarray, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> Tensor:
    out = Tensor(data)
    tape = current_tape()
    if tape is not None and any(t.tracked for t in inputs):
        tape.record(out, inputs, backward_fn, op)
    return out


def backward(tape: Tape, loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> List[np.ndarray]:
    """
    Reverse accumulation from a scalar loss.

    Every record is visited exactly once, last to first. Parameters that no
    path connects to the loss get an all-zero gradient. When params is None
    the gradients land on every requires_grad leaf the tape touched.
    """
    if loss.data.size != 1:
        raise NotScalar(f"loss must be scalar, got shape {loss.shape}")

    adjoints: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: Dict[int, Tensor] = {}

    for rec in reversed(tape.records):
        g_out = adjoints.pop(id(rec.output), None)
        if g_out is None:
            continue
        grads = rec.backward_fn(g_out)
        for inp, g in zip(rec.inputs, grads):
            if g is None or not inp.tracked:
                continue
            if inp.requires_grad:
                leaves[id(inp)] = inp
            key = id(inp)
            if key in adjoints:
                adjoints[key] = adjoints[key] + g
            else:
                adjoints[key] = g

    if params is None:
        params = list(leaves.values())

    result = []
    for p in params:
        g = adjoints.get(id(p))
        if g is None:
            g = np.zeros_like(p.data)
        elif g.shape != p.data.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} does not match parameter shape {p.data.shape}")
        p.grad = g
        result.append(g)

    logging.debug(f"[TAPE] backward over {len(tape.records)} records, {len(result)} parameters")
    return result


# =============================================================================
# ELEMENTWISE / ALGEBRA
# =============================================================================

def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: shapes {a.shape} and {b.shape} do not broadcast")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'add')
    return _emit(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), 'add')


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'sub')
    return _emit(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), 'sub')


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'mul')
    return _emit(a.data * b.data, (a, b),
                 lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)), 'mul')


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: shapes {a.shape} and {b.shape} are incompatible")
    return _emit(a.data @ b.data, (a, b),
                 lambda g: (g @ b.data.T, a.data.T @ g), 'matmul')


def spmm(matrix: sp.spmatrix, x) -> Tensor:
    """Constant sparse matrix times a dense tensor (message passing, pooling)"""
    x = as_tensor(x)
    if x.data.ndim != 2 or matrix.shape[1] != x.shape[0]:
        raise ShapeMismatch(f"spmm: sparse {matrix.shape} and dense {x.shape} are incompatible")
    csr = sp.csr_matrix(matrix)
    out = np.asarray(csr @ x.data)
    return _emit(out, (x,), lambda g: (np.asarray(csr.T @ g),), 'spmm')


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _emit(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,), 'relu')


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    s = expit(x.data)
    return _emit(s, (x,), lambda g: (g * s * (1.0 - s),), 'sigmoid')


def exp(x) -> Tensor:
    x = as_tensor(x)
    e = np.exp(np.minimum(x.data, _EXP_MAX))
    return _emit(e, (x,), lambda g: (g * e,), 'exp')


def log(x) -> Tensor:
    x = as_tensor(x)
    safe = np.maximum(x.data, _LOG_MIN)
    return _emit(np.log(safe), (x,), lambda g: (g / safe,), 'log')


def sqrt(x) -> Tensor:
    x = as_tensor(x)
    r = np.sqrt(np.maximum(x.data, 0.0))
    return _emit(r, (x,), lambda g: (g * 0.5 / np.maximum(r, _LOG_MIN),), 'sqrt')


def square(x) -> Tensor:
    x = as_tensor(x)
    return _emit(x.data * x.data, (x,), lambda g: (2.0 * g * x.data,), 'square')


def absolute(x) -> Tensor:
    x = as_tensor(x)
    return _emit(np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),), 'abs')


def clip(x, low: float, high: float) -> Tensor:
    x = as_tensor(x)
    inside = (x.data >= low) & (x.data <= high)
    return _emit(np.clip(x.data, low, high), (x,), lambda g: (g * inside,), 'clip')


def softplus(x) -> Tensor:
    x = as_tensor(x)
    return _emit(np.logaddexp(0.0, x.data), (x,), lambda g: (g * expit(x.data),), 'softplus')


# =============================================================================
# REDUCTIONS / SHAPE
# =============================================================================

def sum(x, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def grad(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _emit(np.asarray(out), (x,), grad, 'sum')


def mean(x, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.data.size if axis is None else x.shape[axis]
    if count == 0:
        raise ShapeMismatch(f"mean over an empty axis of shape {x.shape}")
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in parts], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat: {e}")
    sizes = [t.shape[axis] for t in parts]
    bounds = np.cumsum(sizes)[:-1]

    def grad(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit(out, tuple(parts), grad, 'concat')


def reshape(x, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise ShapeMismatch(f"reshape: {e}")
    return _emit(out, (x,), lambda g: (g.reshape(x.shape),), 'reshape')


def take_rows(x, index: np.ndarray) -> Tensor:
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)

    def grad(g):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return _emit(x.data[index], (x,), grad, 'take_rows')


def segment_softmax(scores, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Softmax of an (n, 1) score column within each segment"""
    scores = as_tensor(scores)
    if scores.data.ndim != 2 or scores.shape[1] != 1 or scores.shape[0] != len(segment_ids):
        raise ShapeMismatch(f"segment_softmax: scores {scores.shape} vs {len(segment_ids)} segment ids")
    seg = np.asarray(segment_ids, dtype=np.int64)
    s = scores.data[:, 0]
    seg_max = np.full(num_segments, -np.inf)
    np.maximum.at(seg_max, seg, s)
    e = np.exp(s - seg_max[seg])
    denom = np.bincount(seg, weights=e, minlength=num_segments)
    a = e / denom[seg]

    def grad(g):
        g = g[:, 0]
        dot = np.bincount(seg, weights=a * g, minlength=num_segments)
        return ((a * (g - dot[seg]))[:, None],)

    return _emit(a[:, None], (scores,), grad, 'segment_softmax')


def dropout(x, rate: float, rng: Optional[np.random.Generator], training: bool = True) -> Tensor:
    """Inverted dropout; identity in eval mode or at rate 0"""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got: {rate}")
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate).astype(np.float64) / (1.0 - rate)
    return _emit(x.data * keep, (x,), lambda g: (g * keep,), 'dropout')
