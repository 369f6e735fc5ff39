"""
Core infrastructure for the SemiMol engine.
Contains the error hierarchy, console colours and run-directory artifacts.
"""

from .colors import Colors, status
from .errors import SemiMolError, ConfigError, DataError, NumericError
from .run_artifacts import RunArtifacts, default_run_dir

__all__ = [
    'Colors',
    'status',
    'SemiMolError',
    'ConfigError',
    'DataError',
    'NumericError',
    'RunArtifacts',
    'default_run_dir',
]
