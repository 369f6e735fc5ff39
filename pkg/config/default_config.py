"""
Centralized Configuration Management
=====================================

Environment-level settings in one place with validation and type hints.
Per-run hyperparameters live in experiment_config.ExperimentConfig.
"""

import os
from typing import Dict, List
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

_LOG_LEVEL_NAMES = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']


def _env_flag(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


# =============================================================================
# ENVIRONMENT VARIABLES CONFIG
# =============================================================================

class Config:
    """Centralized configuration with validation and environment variable loading"""

    def __init__(self):
        # =====================================================================
        # RUN LOCATIONS
        # =====================================================================
        self.RUN_ROOT = os.getenv('SEMIMOL_RUN_ROOT', 'runs')
        self.DEFAULT_CONFIG_PATH = os.getenv('SEMIMOL_CONFIG', 'data/example_config.json')

        # =====================================================================
        # EXECUTION
        # =====================================================================
        self.DEFAULT_SEED = int(os.getenv('SEMIMOL_SEED', '0'))
        self.WORKERS = int(os.getenv('SEMIMOL_WORKERS', '1'))  # read-only inference fan-out
        self.SHOW_PROGRESS = _env_flag('SEMIMOL_PROGRESS', 'false')
        self.RUN_BENCHMARKS = _env_flag('SEMIMOL_RUN_BENCHMARKS', 'false')

        # =====================================================================
        # LOGGING
        # =====================================================================
        self.LOG_LEVELS: Dict[str, str] = {
            'file': os.getenv('FILE_LOG_LEVEL', 'DEBUG').upper(),
            'console': os.getenv('CONSOLE_LOG_LEVEL', 'WARNING').upper(),
        }

        self.LOG_FILES: Dict[str, str] = {
            'main': os.getenv('MAIN_LOG_FILE', 'train.log'),  # relative to the run directory
        }

    def validate_config(self) -> List[str]:
        """Validate configuration and return list of issues"""
        issues = []

        if not self.RUN_ROOT:
            issues.append("SEMIMOL_RUN_ROOT must not be empty")

        if self.WORKERS < 1:
            issues.append(f"SEMIMOL_WORKERS must be >= 1, got: {self.WORKERS}")

        if self.DEFAULT_SEED < 0:
            issues.append(f"SEMIMOL_SEED must be >= 0, got: {self.DEFAULT_SEED}")

        for target, level in self.LOG_LEVELS.items():
            if level not in _LOG_LEVEL_NAMES:
                issues.append(f"{target} log level must be one of {_LOG_LEVEL_NAMES}, got: {level}")

        return issues


# Global config instance
config = Config()
