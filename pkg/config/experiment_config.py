"""
Experiment Configuration
========================

One JSON document per run, organised in sections:

    {
      "name": "semimol", "seed": 0, "strategy": "semimol",
      "task": "regression", "metric": "rmse",
      "data": {...}, "model": {...}, "training": {...},
      "semimol": {...}, "cliffs": {...}, "output": {...}
    }

Command-line overrides use dotted paths (`training.lr=0.0005`); the value is read
as a JSON literal and falls back to a plain string.
"""

import json
import logging
from dataclasses import dataclass, field, fields, asdict, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, get_type_hints, Union

from config.default_config import config as env_config
from src.core.errors import ConfigError

STRATEGIES = ['semimol', 'supervised', 'pi_model', 'fixed_threshold', 'percentile']
BACKBONES = ['gin', 'fingerprint_mlp']
TASKS = ['regression', 'classification']
METRICS = ['rmse', 'mae', 'roc_auc']
LOSSES = ['rmse', 'mae', 'mse']
POOLINGS = ['sum', 'mean', 'attention']
INSTRUCTOR_ENCODERS = ['fingerprint_mlp', 'gin']

# metric -> lower is better
METRIC_DIRECTION = {'rmse': True, 'mae': True, 'roc_auc': False}


# =============================================================================
# SECTIONS
# =============================================================================

@dataclass
class DataConfig:
    """Input files and how to read them"""
    labeled_path: str = 'data/fixtures/tiny_labeled.csv'
    unlabeled_path: Optional[str] = 'data/fixtures/tiny_pool.smi'
    smiles_column: str = 'smiles'
    label_column: str = 'label'
    split_column: str = 'split'
    split_ratios: List[float] = field(default_factory=lambda: [0.8, 0.1, 0.1])
    pool_cap: int = 5000


@dataclass
class ModelConfig:
    """Target / instructor architecture"""
    backbone: str = 'gin'
    hidden_dim: int = 64
    num_layers: int = 3
    head_layers: int = 2
    pooling: str = 'attention'
    dropout: float = 0.2
    use_edge_features: bool = False
    edge_hidden_dim: int = 64
    fingerprint_radius: int = 2
    fingerprint_width: int = 1024
    instructor_encoder: str = 'fingerprint_mlp'
    instructor_hidden_dim: int = 64


@dataclass
class TrainingConfig:
    """Optimizer and loop settings shared by every strategy"""
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    warmup_epochs_f: int = 30
    warmup_epochs_g: int = 5
    patience: int = 10
    loss: str = 'rmse'
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    workers: int = 1


@dataclass
class SemiMolConfig:
    """Pseudo-labelling and curriculum settings"""
    gamma: float = 0.9
    delta_gamma: float = 0.05
    gamma_min: float = 0.0
    k: int = 5
    loss_weight: float = 1.0
    consistency_weight: float = 1.0
    percentile_start: float = 0.1
    percentile_end: float = 1.0


@dataclass
class CliffConfig:
    """Activity-cliff thresholds"""
    sim_threshold: float = 0.9
    potency_threshold: float = 1.0


@dataclass
class OutputConfig:
    """What a run writes"""
    run_dir: Optional[str] = None
    dump_epochs: List[int] = field(default_factory=list)
    log_wall_time: bool = False
    save_checkpoints: bool = True


_SECTIONS = {
    'data': DataConfig,
    'model': ModelConfig,
    'training': TrainingConfig,
    'semimol': SemiMolConfig,
    'cliffs': CliffConfig,
    'output': OutputConfig,
}


@dataclass
class ExperimentConfig:
    """Complete, validated description of one run"""
    name: str = 'semimol'
    seed: int = 0
    strategy: str = 'semimol'
    task: str = 'regression'
    metric: str = 'rmse'
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    semimol: SemiMolConfig = field(default_factory=SemiMolConfig)
    cliffs: CliffConfig = field(default_factory=CliffConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def lower_is_better(self) -> bool:
        return METRIC_DIRECTION[self.metric]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Build and validate; raises ConfigError listing every problem"""
        issues: List[str] = []
        built = _build(cls, data, '', issues)
        if not issues:
            issues.extend(built.validate())
        if issues:
            raise ConfigError(issues)
        return built

    def validate(self) -> List[str]:
        """Return every issue with its field path"""
        issues = []

        def check(ok: bool, message: str):
            if not ok:
                issues.append(message)

        check(self.strategy in STRATEGIES, f"strategy must be one of {STRATEGIES}, got: {self.strategy}")
        check(self.task in TASKS, f"task must be one of {TASKS}, got: {self.task}")
        check(self.metric in METRICS, f"metric must be one of {METRICS}, got: {self.metric}")
        if self.task == 'classification':
            check(self.metric == 'roc_auc', f"metric must be roc_auc for classification, got: {self.metric}")
        elif self.task == 'regression':
            check(self.metric in ('rmse', 'mae'), f"metric must be rmse or mae for regression, got: {self.metric}")
        check(self.seed >= 0, f"seed must be >= 0, got: {self.seed}")

        d = self.data
        check(bool(d.labeled_path), "data.labeled_path must not be empty")
        check(len(d.split_ratios) == 3, f"data.split_ratios must have 3 entries, got: {d.split_ratios}")
        if len(d.split_ratios) == 3:
            check(all(r >= 0 for r in d.split_ratios), f"data.split_ratios must be non-negative, got: {d.split_ratios}")
            check(abs(sum(d.split_ratios) - 1.0) <= 1e-9, f"data.split_ratios must sum to 1, got: {sum(d.split_ratios)}")
        check(d.pool_cap >= 0, f"data.pool_cap must be >= 0, got: {d.pool_cap}")

        m = self.model
        check(m.backbone in BACKBONES, f"model.backbone must be one of {BACKBONES}, got: {m.backbone}")
        check(m.pooling in POOLINGS, f"model.pooling must be one of {POOLINGS}, got: {m.pooling}")
        check(m.instructor_encoder in INSTRUCTOR_ENCODERS,
              f"model.instructor_encoder must be one of {INSTRUCTOR_ENCODERS}, got: {m.instructor_encoder}")
        for name in ('hidden_dim', 'num_layers', 'head_layers', 'edge_hidden_dim', 'instructor_hidden_dim'):
            value = getattr(m, name)
            check(value >= 1, f"model.{name} must be >= 1, got: {value}")
        check(0.0 <= m.dropout < 1.0, f"model.dropout must be in [0, 1), got: {m.dropout}")
        check(m.fingerprint_radius >= 0, f"model.fingerprint_radius must be >= 0, got: {m.fingerprint_radius}")
        width = m.fingerprint_width
        check(width >= 64 and (width & (width - 1)) == 0,
              f"model.fingerprint_width must be a power of two >= 64, got: {width}")

        t = self.training
        check(t.lr > 0, f"training.lr must be > 0, got: {t.lr}")
        check(t.batch_size >= 1, f"training.batch_size must be >= 1, got: {t.batch_size}")
        check(t.epochs >= 1, f"training.epochs must be >= 1, got: {t.epochs}")
        check(t.warmup_epochs_f >= 0, f"training.warmup_epochs_f must be >= 0, got: {t.warmup_epochs_f}")
        check(t.warmup_epochs_g >= 0, f"training.warmup_epochs_g must be >= 0, got: {t.warmup_epochs_g}")
        check(t.patience >= 1, f"training.patience must be >= 1, got: {t.patience}")
        check(t.loss in LOSSES, f"training.loss must be one of {LOSSES}, got: {t.loss}")
        check(0.0 <= t.beta1 < 1.0, f"training.beta1 must be in [0, 1), got: {t.beta1}")
        check(0.0 <= t.beta2 < 1.0, f"training.beta2 must be in [0, 1), got: {t.beta2}")
        check(t.adam_eps > 0, f"training.adam_eps must be > 0, got: {t.adam_eps}")
        check(t.workers >= 1, f"training.workers must be >= 1, got: {t.workers}")

        s = self.semimol
        check(0.0 <= s.gamma <= 1.0, f"semimol.gamma must be in [0, 1], got: {s.gamma}")
        check(0.0 < s.delta_gamma < 1.0, f"semimol.delta_gamma must be in (0, 1), got: {s.delta_gamma}")
        check(0.0 <= s.gamma_min <= s.gamma, f"semimol.gamma_min must be in [0, gamma], got: {s.gamma_min}")
        check(s.k >= 1, f"semimol.k must be >= 1, got: {s.k}")
        check(s.loss_weight >= 0, f"semimol.loss_weight must be >= 0, got: {s.loss_weight}")
        check(s.consistency_weight >= 0, f"semimol.consistency_weight must be >= 0, got: {s.consistency_weight}")
        check(0.0 < s.percentile_start <= s.percentile_end <= 1.0,
              f"semimol.percentile_start/end must satisfy 0 < start <= end <= 1, got: "
              f"{s.percentile_start}, {s.percentile_end}")

        c = self.cliffs
        check(0.0 < c.sim_threshold <= 1.0, f"cliffs.sim_threshold must be in (0, 1], got: {c.sim_threshold}")
        check(c.potency_threshold > 0, f"cliffs.potency_threshold must be > 0, got: {c.potency_threshold}")

        o = self.output
        check(all(e >= 0 for e in o.dump_epochs), f"output.dump_epochs must be non-negative, got: {o.dump_epochs}")

        return issues


# =============================================================================
# LOADING
# =============================================================================

def _type_matches(value: Any, hint: Any) -> bool:
    origin = getattr(hint, '__origin__', None)
    if origin is Union:
        return any(_type_matches(value, arg) for arg in hint.__args__)
    if hint is type(None):
        return value is None
    if origin in (list, List):
        if not isinstance(value, list):
            return False
        (item_hint,) = hint.__args__
        return all(_type_matches(item, item_hint) for item in value)
    if hint is bool:
        return isinstance(value, bool)
    if hint is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if hint is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if hint is str:
        return isinstance(value, str)
    return True


def _coerce(value: Any, hint: Any) -> Any:
    if hint is float and isinstance(value, int):
        return float(value)
    origin = getattr(hint, '__origin__', None)
    if origin in (list, List) and hint.__args__[0] is float:
        return [float(v) for v in value]
    return value


def _build(cls, data: Any, prefix: str, issues: List[str]):
    if not isinstance(data, dict):
        issues.append(f"{prefix.rstrip('.') or 'config'} must be an object, got: {type(data).__name__}")
        return cls()

    hints = get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    for key in sorted(set(data) - known):
        issues.append(f"unknown field {prefix}{key}")

    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        hint = hints[f.name]
        path = f"{prefix}{f.name}"
        if is_dataclass(hint):
            kwargs[f.name] = _build(hint, value, f"{path}.", issues)
        elif _type_matches(value, hint):
            kwargs[f.name] = _coerce(value, hint)
        else:
            issues.append(f"{path} has wrong type: {value!r}")
    return cls(**kwargs)


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply `a.b=value` overrides to a raw config dict (returns a new dict)"""
    result = json.loads(json.dumps(data))
    issues = []
    for item in overrides:
        if '=' not in item:
            issues.append(f"override must look like key=value, got: {item}")
            continue
        key, raw = item.split('=', 1)
        path = [part for part in key.strip().split('.') if part]
        if not path:
            issues.append(f"override has an empty key: {item}")
            continue
        if len(path) > 2 or (len(path) == 2 and path[0] not in _SECTIONS):
            issues.append(f"unknown field {key.strip()}")
            continue
        target = result
        for part in path[:-1]:
            target = target.setdefault(part, {})
        target[path[-1]] = _parse_value(raw.strip())
    if issues:
        raise ConfigError(issues)
    return result


def load_experiment_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Read a JSON config file (or start from defaults) and apply overrides"""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if isinstance(data, dict):
        # environment defaults fill keys the file leaves out
        data.setdefault('seed', env_config.DEFAULT_SEED)
        if isinstance(data.setdefault('training', {}), dict):
            data['training'].setdefault('workers', env_config.WORKERS)
    data = apply_overrides(data, overrides)
    experiment = ExperimentConfig.from_dict(data)
    logging.info(f"[CONFIG] Loaded experiment '{experiment.name}' strategy={experiment.strategy} seed={experiment.seed}")
    return experiment
