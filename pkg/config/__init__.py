"""Configuration package initialization"""

from .default_config import config, Config
from .experiment_config import (
    ExperimentConfig, DataConfig, ModelConfig, TrainingConfig,
    SemiMolConfig, CliffConfig, OutputConfig,
    load_experiment_config, apply_overrides,
)

__all__ = [
    'config', 'Config',
    'ExperimentConfig', 'DataConfig', 'ModelConfig', 'TrainingConfig',
    'SemiMolConfig', 'CliffConfig', 'OutputConfig',
    'load_experiment_config', 'apply_overrides',
]
