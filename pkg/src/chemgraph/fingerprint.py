"""
ECFP-style circular fingerprints and Tanimoto similarity.

Environment identifiers are 64-bit BLAKE2b digests over little-endian
integer tuples, so bitsets are identical on every platform and run.
"""

import hashlib
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.chemgraph.graph import ATOMIC_NUMBERS, MolecularGraph
from src.core.errors import WidthMismatch

DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 1024


def stable_hash(values: Sequence[int]) -> int:
    """Seedless 64-bit hash of an integer sequence"""
    payload = np.asarray(values, dtype='<i8').tobytes()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), 'little')


def _fold(value: int) -> int:
    # fold an unsigned 64-bit id into the signed range for the next '<i8' pack
    return value - (1 << 64) if value >= (1 << 63) else value


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """Fixed-width bitset of hashed radial environments"""
    bits: np.ndarray  # bool, shape (width,)
    radius: int = DEFAULT_RADIUS

    @property
    def width(self) -> int:
        return int(self.bits.shape[0])

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def on_bits(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]

    def as_array(self) -> np.ndarray:
        return self.bits.astype(np.float64)

    @classmethod
    def from_bits(cls, on_bits: Sequence[int], width: int = DEFAULT_WIDTH, radius: int = DEFAULT_RADIUS) -> 'Fingerprint':
        bits = np.zeros(width, dtype=bool)
        bits[list(on_bits)] = True
        return cls(bits, radius)

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.radius, self.bits.tobytes()))


def atom_invariants(graph: MolecularGraph) -> List[int]:
    """Radius-0 environment ids: element, degree, hydrogens, charge, aromaticity, ring membership"""
    in_ring = [False] * graph.num_atoms
    for bond in graph.bonds:
        if bond.in_ring:
            in_ring[bond.begin] = in_ring[bond.end] = True
    return [
        stable_hash([ATOMIC_NUMBERS[a.symbol], a.degree, a.hydrogens, a.charge, int(a.aromatic), int(in_ring[i])])
        for i, a in enumerate(graph.atoms)
    ]


def environment_ids(graph: MolecularGraph, radius: int = DEFAULT_RADIUS) -> List[List[int]]:
    """Per-radius lists of environment ids, atoms in index order"""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got: {radius}")
    neighbors = [graph.neighbors(i) for i in range(graph.num_atoms)]
    current = atom_invariants(graph)
    layers = [current]
    for r in range(1, radius + 1):
        updated = []
        for i in range(graph.num_atoms):
            env = sorted((bond.order.code, _fold(current[j])) for j, bond in neighbors[i])
            payload = [r, _fold(current[i])]
            for code, inv in env:
                payload.extend((code, inv))
            updated.append(stable_hash(payload))
        current = updated
        layers.append(current)
    return layers


def morgan_fingerprint(graph: MolecularGraph, radius: int = DEFAULT_RADIUS,
                       width: int = DEFAULT_WIDTH) -> Fingerprint:
    """Set bit (id mod width) for every environment at radius 0..radius"""
    if width < 64 or width & (width - 1):
        raise ValueError(f"width must be a power of two >= 64, got: {width}")
    bits = np.zeros(width, dtype=bool)
    for layer in environment_ids(graph, radius):
        for env_id in layer:
            bits[env_id % width] = True
    return Fingerprint(bits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 1.0 when both are empty"""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = np.count_nonzero(a.bits | b.bits)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a.bits & b.bits) / union)


def tanimoto_matrix(bits: np.ndarray) -> np.ndarray:
    """All-pairs Tanimoto over an (n, width) 0/1 matrix"""
    x = np.asarray(bits, dtype=np.float64)
    inter = x @ x.T
    counts = x.sum(axis=1)
    union = counts[:, None] + counts[None, :] - inter
    with np.errstate(invalid='ignore', divide='ignore'):
        sim = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
    return sim
