"""
Instructor model g: (molecule, label, per-sample target loss) -> confidence.

The label and loss enter as constant features standardised with statistics of
the current hybrid set D'. The loss value is computed outside the tape, so no
gradient flows from the instructor's objective into the target model.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.models import layers as L
from src.models.batching import GraphBatch
from src.models.spec import ModelSpec
from src.ndcore import tensor as T
from src.ndcore.tensor import Tensor

PREFIX = 'g'
HF_CLAMP = 1e6
P_MARGIN = 1e-12
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class FusionStats:
    """Standardisation constants for the label and loss features"""
    y_mean: float = 0.0
    y_std: float = 1.0
    hf_mean: float = 0.0
    hf_std: float = 1.0

    @classmethod
    def from_arrays(cls, y: np.ndarray, hf: np.ndarray) -> 'FusionStats':
        y = np.asarray(y, dtype=np.float64)
        hf = np.clip(np.asarray(hf, dtype=np.float64), 0.0, HF_CLAMP)
        if y.size == 0:
            return cls()

        def std(a):
            s = float(a.std())
            return s if s > _STD_FLOOR else 1.0

        return cls(float(y.mean()), std(y), float(hf.mean()), std(hf))

    def features(self, y: np.ndarray, hf: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        hf = np.nan_to_num(np.asarray(hf, dtype=np.float64), nan=HF_CLAMP, posinf=HF_CLAMP)
        hf = np.clip(hf, 0.0, HF_CLAMP)
        return np.stack([(y - self.y_mean) / self.y_std, (hf - self.hf_mean) / self.hf_std], axis=1)


class InstructorModel:
    """Sample encoder plus fusion MLP ending in a sigmoid"""

    def __init__(self, spec: ModelSpec):
        spec.check()
        self.spec = spec

    @property
    def hidden(self) -> int:
        return self.spec.instructor_hidden_dim

    def declarations(self) -> List[L.ParamDecl]:
        s = self.spec
        if s.instructor_encoder == 'gin':
            edge = (s.d_edge, s.edge_hidden_dim) if s.use_edge_features else (0, 0)
            decls = L.declare_gin(f"{PREFIX}.gin", s.d_node, self.hidden, s.num_layers, *edge)
            decls += L.declare_pool(f"{PREFIX}.pool", s.pooling, self.hidden)
        else:
            decls = L.declare_mlp(f"{PREFIX}.fp", s.fingerprint_width, self.hidden, 1)
        decls += L.declare_dense(f"{PREFIX}.fusion.hidden", self.hidden + 2, self.hidden)
        decls += L.declare_dense(f"{PREFIX}.fusion.out", self.hidden, 1)
        return decls

    def init(self, rng: np.random.Generator) -> L.Params:
        return L.materialize(self.declarations(), rng)

    def parameter_count(self) -> int:
        return int(sum(np.prod(shape) for _, shape, _ in self.declarations()))

    def encode(self, params: L.Params, batch: GraphBatch, training: bool,
               rng: Optional[np.random.Generator]) -> Tensor:
        s = self.spec
        if s.instructor_encoder == 'gin':
            h = L.gin_encode(params, batch, f"{PREFIX}.gin", s.num_layers, s.dropout,
                             training, rng, s.use_edge_features)
            return L.pool(params, h, batch, f"{PREFIX}.pool", s.pooling)
        return L.mlp(params, Tensor(batch.fingerprints), f"{PREFIX}.fp", 1, s.dropout, training, rng)

    def logits(self, params: L.Params, batch: GraphBatch, y: np.ndarray, hf: np.ndarray,
               stats: FusionStats, training: bool = False,
               rng: Optional[np.random.Generator] = None) -> Tensor:
        enc = self.encode(params, batch, training, rng)
        fused = T.concat([enc, Tensor(stats.features(y, hf))], axis=1)
        z = T.dropout(T.relu(L.dense(fused, params, f"{PREFIX}.fusion.hidden")), self.spec.dropout, rng, training)
        out = L.dense(z, params, f"{PREFIX}.fusion.out")
        return T.reshape(out, (out.shape[0],))

    def forward(self, params: L.Params, batch: GraphBatch, y: np.ndarray, hf: np.ndarray,
                stats: FusionStats, training: bool = False,
                rng: Optional[np.random.Generator] = None) -> Tensor:
        """Confidence p in (0, 1) per sample, shape (num_graphs,)"""
        return T.sigmoid(self.logits(params, batch, y, hf, stats, training, rng))


def instructor_forward(model: InstructorModel, params: L.Params, batch: GraphBatch,
                       y: np.ndarray, hf: np.ndarray, stats: Optional[FusionStats] = None) -> np.ndarray:
    """Eval-mode confidences, kept strictly inside (0, 1) even where the sigmoid saturates"""
    stats = stats or FusionStats()
    p = model.forward(params, batch, y, hf, stats, training=False).data
    return np.clip(p, P_MARGIN, 1.0 - P_MARGIN)
