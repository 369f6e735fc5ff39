"""
Node and edge featurization.

Node row layout (26 columns):
    element one-hot (12) | degree one-hot 0..6 (7) | formal charge / 2 (1) |
    aromatic flag (1) | hydrogen-count one-hot 0..4 (5)

Edge row layout (5 columns):
    bond-order one-hot single/double/triple/aromatic (4) | in-ring flag (1)

Degrees above 6 and hydrogen counts above 4 land in the last slot.
"""

from dataclasses import dataclass

import numpy as np

from src.chemgraph.graph import BondOrder, MolecularGraph, SUPPORTED_ELEMENTS

FEATURIZER_VERSION = 1

MAX_DEGREE = 6
MAX_HYDROGENS = 4
BOND_ORDERS = (BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC)

ELEMENT_SLICE = slice(0, len(SUPPORTED_ELEMENTS))
DEGREE_SLICE = slice(ELEMENT_SLICE.stop, ELEMENT_SLICE.stop + MAX_DEGREE + 1)
CHARGE_COLUMN = DEGREE_SLICE.stop
AROMATIC_COLUMN = CHARGE_COLUMN + 1
HYDROGEN_SLICE = slice(AROMATIC_COLUMN + 1, AROMATIC_COLUMN + 2 + MAX_HYDROGENS)
D_NODE = HYDROGEN_SLICE.stop

ORDER_SLICE = slice(0, len(BOND_ORDERS))
RING_COLUMN = ORDER_SLICE.stop
D_EDGE = RING_COLUMN + 1

NODE_ONE_HOT_BLOCKS = (ELEMENT_SLICE, DEGREE_SLICE, HYDROGEN_SLICE)
EDGE_ONE_HOT_BLOCKS = (ORDER_SLICE,)

_ELEMENT_INDEX = {symbol: k for k, symbol in enumerate(SUPPORTED_ELEMENTS)}
_ORDER_INDEX = {order: k for k, order in enumerate(BOND_ORDERS)}


@dataclass(frozen=True, eq=False)
class FeatureMatrices:
    node_features: np.ndarray
    edge_features: np.ndarray
    edge_index: np.ndarray  # (2, num_bonds) begin/end atom indices
    d_node: int = D_NODE
    d_edge: int = D_EDGE


def featurize(graph: MolecularGraph) -> FeatureMatrices:
    """Feature matrices for one graph"""
    nodes = np.zeros((graph.num_atoms, D_NODE), dtype=np.float64)
    for i, atom in enumerate(graph.atoms):
        nodes[i, _ELEMENT_INDEX[atom.symbol]] = 1.0
        nodes[i, DEGREE_SLICE.start + min(atom.degree, MAX_DEGREE)] = 1.0
        nodes[i, CHARGE_COLUMN] = atom.charge / 2.0
        nodes[i, AROMATIC_COLUMN] = 1.0 if atom.aromatic else 0.0
        nodes[i, HYDROGEN_SLICE.start + min(atom.hydrogens, MAX_HYDROGENS)] = 1.0

    edges = np.zeros((graph.num_bonds, D_EDGE), dtype=np.float64)
    index = np.zeros((2, graph.num_bonds), dtype=np.int64)
    for k, bond in enumerate(graph.bonds):
        edges[k, _ORDER_INDEX[bond.order]] = 1.0
        edges[k, RING_COLUMN] = 1.0 if bond.in_ring else 0.0
        index[0, k] = bond.begin
        index[1, k] = bond.end

    return FeatureMatrices(nodes, edges, index)
