"""Architecture description shared by the target and instructor models"""

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import List

from src.chemgraph.features import D_EDGE, D_NODE
from src.core.errors import InvalidSpec

BACKBONES = ('gin', 'fingerprint_mlp')
POOLINGS = ('sum', 'mean', 'attention')
TASKS = ('regression', 'classification')


@dataclass(frozen=True)
class ModelSpec:
    """Layer sizes and switches; hashed into every checkpoint"""
    backbone: str = 'gin'
    task: str = 'regression'
    d_node: int = D_NODE
    d_edge: int = D_EDGE
    hidden_dim: int = 64
    num_layers: int = 3
    head_layers: int = 2
    pooling: str = 'attention'
    dropout: float = 0.2
    use_edge_features: bool = False
    edge_hidden_dim: int = 64
    fingerprint_width: int = 1024
    fingerprint_radius: int = 2
    instructor_encoder: str = 'fingerprint_mlp'
    instructor_hidden_dim: int = 64

    @classmethod
    def from_config(cls, experiment) -> 'ModelSpec':
        m = experiment.model
        return cls(
            backbone=m.backbone,
            task=experiment.task,
            hidden_dim=m.hidden_dim,
            num_layers=m.num_layers,
            head_layers=m.head_layers,
            pooling=m.pooling,
            dropout=m.dropout,
            use_edge_features=m.use_edge_features,
            edge_hidden_dim=m.edge_hidden_dim,
            fingerprint_width=m.fingerprint_width,
            fingerprint_radius=m.fingerprint_radius,
            instructor_encoder=m.instructor_encoder,
            instructor_hidden_dim=m.instructor_hidden_dim,
        )

    def issues(self) -> List[str]:
        problems = []
        for name in ('d_node', 'd_edge', 'hidden_dim', 'num_layers', 'head_layers',
                     'edge_hidden_dim', 'fingerprint_width', 'instructor_hidden_dim'):
            value = getattr(self, name)
            if value <= 0:
                problems.append(f"{name} must be positive, got: {value}")
        if self.backbone not in BACKBONES:
            problems.append(f"backbone must be one of {BACKBONES}, got: {self.backbone}")
        if self.instructor_encoder not in BACKBONES:
            problems.append(f"instructor_encoder must be one of {BACKBONES}, got: {self.instructor_encoder}")
        if self.pooling not in POOLINGS:
            problems.append(f"pooling must be one of {POOLINGS}, got: {self.pooling}")
        if self.task not in TASKS:
            problems.append(f"task must be one of {TASKS}, got: {self.task}")
        if not 0.0 <= self.dropout < 1.0:
            problems.append(f"dropout must be in [0, 1), got: {self.dropout}")
        return problems

    def check(self):
        problems = self.issues()
        if problems:
            raise InvalidSpec(problems)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def digest(self) -> bytes:
        """32-byte SHA-256 of the sorted-key JSON form"""
        return hashlib.sha256(self.to_json().encode('utf-8')).digest()
