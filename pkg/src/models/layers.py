"""
Building blocks shared by the target and instructor networks.

Parameters live in ordered dicts of name -> Tensor. Each block has a
`declare_*` function listing (name, shape, fan_in) in declaration order and a
forward function reading the same names; initialisation and checkpoints both
follow the declaration order.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.batching import GraphBatch
from src.ndcore import tensor as T
from src.ndcore.tensor import Tensor

# (name, shape, fan_in); fan_in 0 marks a zero-initialised tensor
ParamDecl = Tuple[str, Tuple[int, ...], int]
Params = Dict[str, Tensor]


def he_uniform(rng: np.random.Generator, fan_in: int, shape: Tuple[int, ...]) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def materialize(decls: List[ParamDecl], rng: np.random.Generator) -> Params:
    """Create tensors in declaration order, drawing weights from rng"""
    params: Params = {}
    for name, shape, fan_in in decls:
        if fan_in > 0:
            data = he_uniform(rng, fan_in, shape)
        else:
            data = np.zeros(shape)
        params[name] = Tensor(data, requires_grad=True, name=name)
    return params


def dense(x: Tensor, params: Params, prefix: str) -> Tensor:
    return T.add(T.matmul(x, params[f"{prefix}.w"]), params[f"{prefix}.b"])


def declare_dense(prefix: str, d_in: int, d_out: int) -> List[ParamDecl]:
    return [(f"{prefix}.w", (d_in, d_out), d_in), (f"{prefix}.b", (1, d_out), 0)]


# =============================================================================
# GIN ENCODER
# =============================================================================

def declare_gin(prefix: str, d_node: int, hidden: int, layers: int,
                d_edge: int = 0, edge_hidden: int = 0) -> List[ParamDecl]:
    decls: List[ParamDecl] = []
    d_in = d_node
    for layer in range(layers):
        p = f"{prefix}.{layer}"
        decls.append((f"{p}.eps", (1, 1), 0))
        if d_edge:
            decls += declare_dense(f"{p}.edge1", d_edge, edge_hidden)
            decls.append((f"{p}.edge2.w", (edge_hidden, d_in), edge_hidden))
        decls += declare_dense(f"{p}.mlp1", d_in, hidden)
        decls += declare_dense(f"{p}.mlp2", hidden, hidden)
        d_in = hidden
    return decls


def gin_encode(params: Params, batch: GraphBatch, prefix: str, layers: int, dropout: float,
               training: bool, rng: Optional[np.random.Generator], use_edges: bool = False) -> Tensor:
    """
    Node embeddings after `layers` GIN updates:

        m = (1 + eps) * h + sum_{u in N(v)} h_u
        h = relu(W2 relu(W1 m + b1) + b2)

    With edge features the neighbour sum becomes sum relu(h_u + E(e_uv)).
    """
    h = Tensor(batch.x)
    for layer in range(layers):
        p = f"{prefix}.{layer}"
        if use_edges:
            e = T.matmul(T.relu(dense(Tensor(batch.edge_attr), params, f"{p}.edge1")), params[f"{p}.edge2.w"])
            messages = T.relu(T.add(T.take_rows(h, batch.edge_src), e))
            neighbours = T.spmm(batch.edge_scatter, messages)
        else:
            neighbours = T.spmm(batch.adjacency, h)
        self_term = T.mul(h, T.add(params[f"{p}.eps"], 1.0))
        m = T.add(self_term, neighbours)
        h = T.relu(dense(T.relu(dense(m, params, f"{p}.mlp1")), params, f"{p}.mlp2"))
        h = T.dropout(h, dropout, rng, training)
    return h


# =============================================================================
# POOLING
# =============================================================================

def declare_pool(prefix: str, kind: str, hidden: int) -> List[ParamDecl]:
    # no score bias: a constant shift cancels inside each graph's softmax
    if kind == 'attention':
        return [(f"{prefix}.att.w", (hidden, 1), hidden)]
    return []


def pool(params: Params, h: Tensor, batch: GraphBatch, prefix: str, kind: str) -> Tensor:
    """Graph-level readout: (num_graphs, hidden)"""
    if kind == 'sum':
        return T.spmm(batch.membership, h)
    if kind == 'mean':
        return T.spmm(batch.mean_pool, h)
    scores = T.matmul(h, params[f"{prefix}.att.w"])
    weights = T.segment_softmax(scores, batch.segment_ids, batch.num_graphs)
    return T.spmm(batch.membership, T.mul(h, weights))


# =============================================================================
# MLP STACKS
# =============================================================================

def declare_mlp(prefix: str, d_in: int, hidden: int, depth: int) -> List[ParamDecl]:
    decls: List[ParamDecl] = []
    for k in range(depth):
        decls += declare_dense(f"{prefix}.{k}", d_in if k == 0 else hidden, hidden)
    return decls


def mlp(params: Params, x: Tensor, prefix: str, depth: int, dropout: float,
        training: bool, rng: Optional[np.random.Generator]) -> Tensor:
    for k in range(depth):
        x = T.dropout(T.relu(dense(x, params, f"{prefix}.{k}")), dropout, rng, training)
    return x


def declare_head(prefix: str, hidden: int, head_layers: int) -> List[ParamDecl]:
    """(head_layers - 1) hidden FC layers then a scalar output layer"""
    return declare_mlp(f"{prefix}.fc", hidden, hidden, head_layers - 1) + declare_dense(f"{prefix}.out", hidden, 1)


def head(params: Params, z: Tensor, prefix: str, head_layers: int, dropout: float,
         training: bool, rng: Optional[np.random.Generator]) -> Tensor:
    """(num_graphs, hidden) -> (num_graphs,)"""
    z = mlp(params, z, f"{prefix}.fc", head_layers - 1, dropout, training, rng)
    out = dense(z, params, f"{prefix}.out")
    return T.reshape(out, (out.shape[0],))
