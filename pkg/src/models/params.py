"""Parameter trees for f and g"""

import hashlib
from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.models.instructor import InstructorModel
from src.models.spec import ModelSpec
from src.models.target import TargetModel
from src.ndcore.random import RngStreams
from src.ndcore.tensor import Tensor

Params = Dict[str, Tensor]


@dataclass
class ModelParams:
    """Disjoint parameter dicts of the target and instructor models"""
    target: Params
    instructor: Params

    def target_digest(self) -> str:
        return params_digest(self.target)

    def instructor_digest(self) -> str:
        return params_digest(self.instructor)


def init_params(spec: ModelSpec, streams: RngStreams) -> ModelParams:
    """He-uniform weights from the init/f and init/g streams, zero biases and eps"""
    spec.check()
    target = TargetModel(spec).init(streams.get('init/f'))
    instructor = InstructorModel(spec).init(streams.get('init/g'))
    return ModelParams(target, instructor)


def params_digest(params: Params) -> str:
    """SHA-256 over parameter bytes in declaration order"""
    h = hashlib.sha256()
    for name, tensor in params.items():
        h.update(name.encode('utf-8'))
        h.update(np.ascontiguousarray(tensor.data, dtype='<f8').tobytes())
    return h.hexdigest()


def snapshot(params: Params) -> Dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in params.items()}


def restore(params: Params, saved: Dict[str, np.ndarray]):
    for name, t in params.items():
        t.data[...] = saved[name]


def flatten(params: Params) -> np.ndarray:
    if not params:
        return np.zeros(0)
    return np.concatenate([t.data.reshape(-1) for t in params.values()])


def unflatten_into(params: Params, flat: np.ndarray):
    offset = 0
    for t in params.values():
        n = t.data.size
        t.data[...] = flat[offset:offset + n].reshape(t.data.shape)
        offset += n
