"""
Parameter checkpoint files.

Layout (little-endian):
    8 bytes   magic b'SEMIMOL\\x00'
    u32       format version
    32 bytes  SHA-256 of the model spec
    u8 + 7    role (0 = target f, 1 = instructor g) and padding
    u64       number of floats
    f64 * n   parameters in declaration order
"""

import logging
import struct
from pathlib import Path

import numpy as np

from src.core.errors import CheckpointError
from src.models.params import Params, flatten, unflatten_into
from src.models.spec import ModelSpec

MAGIC = b'SEMIMOL\x00'
VERSION = 1
ROLES = {'target': 0, 'instructor': 1}
_HEADER = struct.Struct('<8sI32sB7xQ')


def save_checkpoint(path, spec: ModelSpec, params: Params, role: str = 'target') -> Path:
    path = Path(path)
    flat = flatten(params).astype('<f8')
    header = _HEADER.pack(MAGIC, VERSION, spec.digest(), ROLES[role], flat.size)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(header)
        f.write(flat.tobytes())
    logging.info(f"[CHECKPOINT] Saved {role} parameters ({flat.size} floats) to {path}")
    return path


def read_checkpoint(path) -> dict:
    """Header fields plus the raw float array"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}")
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"checkpoint {path} is truncated")
    magic, version, digest, role, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")
    if version != VERSION:
        raise CheckpointError(f"checkpoint {path} has version {version}, expected {VERSION}")
    body = raw[_HEADER.size:]
    if len(body) != count * 8:
        raise CheckpointError(f"checkpoint {path} holds {len(body)} bytes, header says {count} floats")
    return {
        'version': version,
        'spec_digest': digest,
        'role': role,
        'values': np.frombuffer(body, dtype='<f8').astype(np.float64),
    }


def load_checkpoint(path, spec: ModelSpec, params: Params, role: str = 'target') -> Params:
    """Validate a checkpoint against spec and copy its values into params"""
    content = read_checkpoint(path)
    if content['spec_digest'] != spec.digest():
        raise CheckpointError(f"checkpoint {path} was written for a different model spec")
    if content['role'] != ROLES[role]:
        raise CheckpointError(f"checkpoint {path} does not hold {role} parameters")
    expected = int(sum(t.data.size for t in params.values()))
    if content['values'].size != expected:
        raise CheckpointError(f"checkpoint {path} has {content['values'].size} floats, model needs {expected}")
    unflatten_into(params, content['values'])
    logging.info(f"[CHECKPOINT] Restored {role} parameters from {path}")
    return params
