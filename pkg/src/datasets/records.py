"""Record types for labeled and unlabeled molecules"""

from dataclasses import dataclass, field
from typing import Optional

from src.chemgraph.graph import MolecularGraph

SPLIT_TAGS = ('train', 'val', 'test')


@dataclass
class LabeledRecord:
    smiles: str
    y: float
    split_tag: Optional[str] = None
    cliff_flag: bool = False
    graph: Optional[MolecularGraph] = field(default=None, repr=False, compare=False)


@dataclass
class UnlabeledRecord:
    smiles: str
    graph: Optional[MolecularGraph] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class CliffPair:
    """Two similar molecules with a large potency gap (i < j)"""
    i: int
    j: int
    similarity: float
    delta_potency: float
