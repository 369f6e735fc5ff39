"""
Molecular graph types.

Atoms and bonds are frozen dataclasses; a MolecularGraph stores each bond
once and answers neighbour queries symmetrically.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

SUPPORTED_ELEMENTS = ('B', 'C', 'N', 'O', 'F', 'Si', 'P', 'S', 'Cl', 'Br', 'I', 'H')

ATOMIC_NUMBERS = {
    'H': 1, 'B': 5, 'C': 6, 'N': 7, 'O': 8, 'F': 9, 'Si': 14,
    'P': 15, 'S': 16, 'Cl': 17, 'Br': 35, 'I': 53,
}


class BondOrder(Enum):
    """Bond multiplicity"""
    SINGLE = 'single'
    DOUBLE = 'double'
    TRIPLE = 'triple'
    AROMATIC = 'aromatic'

    @property
    def valence(self) -> int:
        """Valence contribution; aromatic bonds count 1 (the ring adds the rest)"""
        return {'single': 1, 'double': 2, 'triple': 3, 'aromatic': 1}[self.value]

    @property
    def code(self) -> int:
        return {'single': 1, 'double': 2, 'triple': 3, 'aromatic': 4}[self.value]


@dataclass(frozen=True)
class Atom:
    symbol: str
    charge: int = 0
    aromatic: bool = False
    hydrogens: int = 0
    degree: int = 0


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE
    in_ring: bool = False

    def other(self, index: int) -> int:
        return self.end if index == self.begin else self.begin


@dataclass(frozen=True)
class MolecularGraph:
    """Parsed 2D molecule"""
    atoms: Tuple[Atom, ...]
    bonds: Tuple[Bond, ...]
    ring_count: int = 0
    smiles: str = field(default='', compare=False)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, index: int) -> List[Tuple[int, Bond]]:
        """(neighbour index, bond) pairs for one atom, in bond order"""
        out = []
        for bond in self.bonds:
            if bond.begin == index or bond.end == index:
                out.append((bond.other(index), bond))
        return out

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix"""
        n = self.num_atoms
        if not self.bonds:
            return sp.csr_matrix((n, n))
        rows = [b.begin for b in self.bonds] + [b.end for b in self.bonds]
        cols = [b.end for b in self.bonds] + [b.begin for b in self.bonds]
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))

    def validate(self) -> List[str]:
        """Return every structural invariant violation (empty when consistent)"""
        issues = []
        n = self.num_atoms
        seen = set()
        degree = [0] * n
        for k, b in enumerate(self.bonds):
            if not (0 <= b.begin < n and 0 <= b.end < n):
                issues.append(f"bond {k} endpoint out of range: ({b.begin}, {b.end})")
                continue
            if b.begin == b.end:
                issues.append(f"bond {k} is a self-loop on atom {b.begin}")
                continue
            key = (min(b.begin, b.end), max(b.begin, b.end))
            if key in seen:
                issues.append(f"bond {k} duplicates atoms {key}")
            seen.add(key)
            degree[b.begin] += 1
            degree[b.end] += 1
            if b.order is BondOrder.AROMATIC and not (self.atoms[b.begin].aromatic and self.atoms[b.end].aromatic):
                issues.append(f"aromatic bond {k} touches a non-aromatic atom")
        for i, atom in enumerate(self.atoms):
            if atom.degree != degree[i]:
                issues.append(f"atom {i} degree {atom.degree} != incident bonds {degree[i]}")
            if atom.hydrogens < 0:
                issues.append(f"atom {i} has negative hydrogen count")
            if atom.symbol not in SUPPORTED_ELEMENTS:
                issues.append(f"atom {i} has unsupported element {atom.symbol}")
        if self.ring_count < 0:
            issues.append(f"negative ring count {self.ring_count}")
        return issues

    def permuted(self, order: Sequence[int]) -> 'MolecularGraph':
        """Relabel atoms so new atom k is old atom order[k]"""
        if sorted(order) != list(range(self.num_atoms)):
            raise ValueError(f"order must be a permutation of 0..{self.num_atoms - 1}")
        new_index = {old: new for new, old in enumerate(order)}
        atoms = tuple(self.atoms[old] for old in order)
        bonds = tuple(
            Bond(new_index[b.begin], new_index[b.end], b.order, b.in_ring)
            for b in self.bonds
        )
        return MolecularGraph(atoms, bonds, self.ring_count, self.smiles)
