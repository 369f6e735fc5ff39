"""
Molecule encoding and minibatch assembly.

A batch stacks node features of all graphs and carries constant sparse
operators: the block-diagonal adjacency for sum aggregation, the
graph-membership matrix for pooling and, when edge features are enabled,
the directed-edge scatter matrix.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.chemgraph.features import D_EDGE, FeatureMatrices, featurize
from src.chemgraph.fingerprint import morgan_fingerprint
from src.chemgraph.graph import MolecularGraph
from src.chemgraph.smiles import parse_smiles


@dataclass(frozen=True, eq=False)
class EncodedMolecule:
    """Everything a model needs for one molecule"""
    smiles: str
    graph: MolecularGraph
    features: FeatureMatrices
    fingerprint: np.ndarray  # float 0/1, shape (width,)

    @property
    def num_atoms(self) -> int:
        return self.graph.num_atoms


def encode_graph(graph: MolecularGraph, radius: int = 2, width: int = 1024) -> EncodedMolecule:
    fp = morgan_fingerprint(graph, radius, width)
    return EncodedMolecule(graph.smiles, graph, featurize(graph), fp.as_array())


def encode_smiles(smiles: str, radius: int = 2, width: int = 1024) -> EncodedMolecule:
    return encode_graph(parse_smiles(smiles), radius, width)


@dataclass(frozen=True, eq=False)
class GraphBatch:
    x: np.ndarray                 # (num_nodes, d_node)
    adjacency: sp.csr_matrix      # (num_nodes, num_nodes), block diagonal
    membership: sp.csr_matrix     # (num_graphs, num_nodes), 0/1
    mean_pool: sp.csr_matrix      # membership rows scaled by 1 / atoms
    segment_ids: np.ndarray       # (num_nodes,) graph index of each node
    edge_src: np.ndarray          # (2 * num_bonds,) directed edges
    edge_attr: np.ndarray         # (2 * num_bonds, d_edge)
    edge_scatter: sp.csr_matrix   # (num_nodes, 2 * num_bonds), sums messages at their targets
    fingerprints: np.ndarray      # (num_graphs, width)

    @property
    def num_graphs(self) -> int:
        return self.membership.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.x.shape[0]


def collate(molecules: Sequence[EncodedMolecule]) -> GraphBatch:
    """Stack molecules into one disconnected batch graph"""
    if not molecules:
        raise ValueError("cannot collate an empty batch")

    sizes = np.array([m.num_atoms for m in molecules], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    num_nodes = int(sizes.sum())
    num_graphs = len(molecules)

    x = np.vstack([m.features.node_features for m in molecules])
    adjacency = sp.block_diag([m.graph.adjacency() for m in molecules], format='csr')

    segment_ids = np.repeat(np.arange(num_graphs), sizes)
    node_ids = np.arange(num_nodes)
    membership = sp.csr_matrix((np.ones(num_nodes), (segment_ids, node_ids)), shape=(num_graphs, num_nodes))
    mean_pool = sp.csr_matrix((1.0 / sizes[segment_ids], (segment_ids, node_ids)), shape=(num_graphs, num_nodes))

    src: List[np.ndarray] = []
    dst: List[np.ndarray] = []
    attrs: List[np.ndarray] = []
    for m, off in zip(molecules, offsets):
        index = m.features.edge_index
        src.extend([index[0] + off, index[1] + off])
        dst.extend([index[1] + off, index[0] + off])
        attrs.extend([m.features.edge_features, m.features.edge_features])
    edge_src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    edge_dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    edge_attr = np.vstack(attrs) if attrs else np.zeros((0, D_EDGE))
    num_edges = edge_src.shape[0]
    edge_scatter = sp.csr_matrix((np.ones(num_edges), (edge_dst, np.arange(num_edges))), shape=(num_nodes, num_edges))

    fingerprints = np.vstack([m.fingerprint for m in molecules])

    return GraphBatch(x, adjacency, membership, mean_pool, segment_ids,
                      edge_src.astype(np.int64), edge_attr, edge_scatter, fingerprints)


def iter_batches(molecules: Sequence[EncodedMolecule], batch_size: int,
                 order: Optional[np.ndarray] = None):
    """Yield (indices, GraphBatch) chunks in the given order"""
    order = np.arange(len(molecules)) if order is None else np.asarray(order)
    for start in range(0, len(order), batch_size):
        chunk = order[start:start + batch_size]
        yield chunk, collate([molecules[i] for i in chunk])
