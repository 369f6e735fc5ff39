"""
Target model f: molecule -> scalar prediction (regression value or logit).

Two backbones:
- gin: GIN stack, graph pooling (sum | mean | attention), MLP head
- fingerprint_mlp: dense stack over circular-fingerprint bits, same head
"""

from typing import List, Optional

import numpy as np

from src.models import layers as L
from src.models.batching import GraphBatch
from src.models.spec import ModelSpec
from src.ndcore.tensor import Tensor

PREFIX = 'f'


class TargetModel:
    """Stateless network definition; parameters are passed in"""

    def __init__(self, spec: ModelSpec):
        spec.check()
        self.spec = spec

    def declarations(self) -> List[L.ParamDecl]:
        s = self.spec
        if s.backbone == 'gin':
            edge = (s.d_edge, s.edge_hidden_dim) if s.use_edge_features else (0, 0)
            decls = L.declare_gin(f"{PREFIX}.gin", s.d_node, s.hidden_dim, s.num_layers, *edge)
            decls += L.declare_pool(f"{PREFIX}.pool", s.pooling, s.hidden_dim)
        else:
            decls = L.declare_mlp(f"{PREFIX}.fp", s.fingerprint_width, s.hidden_dim, s.num_layers)
        decls += L.declare_head(f"{PREFIX}.head", s.hidden_dim, s.head_layers)
        return decls

    def init(self, rng: np.random.Generator) -> L.Params:
        return L.materialize(self.declarations(), rng)

    def parameter_count(self) -> int:
        return int(sum(np.prod(shape) for _, shape, _ in self.declarations()))

    def embed(self, params: L.Params, batch: GraphBatch, training: bool = False,
              rng: Optional[np.random.Generator] = None) -> Tensor:
        """Graph-level representation before the head"""
        s = self.spec
        if s.backbone == 'gin':
            h = L.gin_encode(params, batch, f"{PREFIX}.gin", s.num_layers, s.dropout,
                             training, rng, s.use_edge_features)
            return L.pool(params, h, batch, f"{PREFIX}.pool", s.pooling)
        return L.mlp(params, Tensor(batch.fingerprints), f"{PREFIX}.fp", s.num_layers, s.dropout, training, rng)

    def forward(self, params: L.Params, batch: GraphBatch, training: bool = False,
                rng: Optional[np.random.Generator] = None) -> Tensor:
        """One scalar per graph, shape (num_graphs,)"""
        z = self.embed(params, batch, training, rng)
        return L.head(params, z, f"{PREFIX}.head", self.spec.head_layers, self.spec.dropout, training, rng)

    def predict(self, params: L.Params, batch: GraphBatch) -> np.ndarray:
        """Eval-mode forward as a plain array"""
        return self.forward(params, batch, training=False).data.copy()


def target_forward(model: TargetModel, params: L.Params, batch: GraphBatch, mode: str = 'eval',
                   rng: Optional[np.random.Generator] = None) -> Tensor:
    if mode not in ('train', 'eval'):
        raise ValueError(f"mode must be 'train' or 'eval', got: {mode}")
    return model.forward(params, batch, training=(mode == 'train'), rng=rng)
