"""
Utilities Module - Helper Functions and Utility Classes

This module contains:
- Validators for cliff thresholds, run directories and epochs
- Early stopping for the warm-up phase
"""

from .validators import (
    validate_thresholds,
    validate_run_dir,
    validate_epoch,
)

from .early_stopping import EarlyStopping

__all__ = [
    # Validators
    'validate_thresholds',
    'validate_run_dir',
    'validate_epoch',
    # Utilities
    'EarlyStopping',
]
