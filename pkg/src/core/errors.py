"""
Exception hierarchy for the SemiMol engine.

Every error carries the process exit code the CLI should return for it:
- 2: configuration problems
- 3: data problems (parsing, ingestion, missing artifacts)
- 4: numeric aborts during training
- 1: contract violations inside the numeric kernels
"""

from typing import List, Optional


class SemiMolError(Exception):
    """Base class for all engine errors"""

    exit_code = 1


# =============================================================================
# CONFIGURATION
# =============================================================================

class ConfigError(SemiMolError):
    """Configuration could not be loaded or failed validation"""

    exit_code = 2

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [issues]
        self.issues: List[str] = list(issues)
        super().__init__("; ".join(self.issues))


class InvalidSpec(ConfigError):
    """Model spec with non-positive or inconsistent dimensions"""


# =============================================================================
# DATA
# =============================================================================

class DataError(SemiMolError):
    """Input data problem"""

    exit_code = 3


class ParseError(DataError):
    """SMILES text could not be parsed; offset is the 0-based byte position"""

    def __init__(self, message: str, offset: int, smiles: Optional[str] = None):
        self.offset = offset
        self.smiles = smiles
        self.reason = message
        super().__init__(f"{message} at offset {offset}")


class DataIoError(DataError):
    """Input file missing or unreadable"""


class MissingColumn(DataError):
    """Required CSV column absent"""


class EmptyDataset(DataError):
    """An operation needed at least one record"""


class RatioError(DataError):
    """Split ratios are malformed"""


class EmptyStratum(DataError):
    """Cliff-restricted metric requested with no flagged records"""


class SingleClass(DataError):
    """ROC-AUC requested with only one class present"""


class MissingMetrics(DataError):
    """Run directory has no metrics JSON"""


class EpochNotDumped(DataError):
    """Pseudo-label dump requested for an epoch that was not dumped"""


class CheckpointError(DataError):
    """Checkpoint file is corrupt or belongs to another model spec"""


# =============================================================================
# NUMERICS
# =============================================================================

class NumericError(SemiMolError):
    """Numeric abort during training"""

    exit_code = 4


class NonFiniteLoss(NumericError):
    """A loss became NaN or Inf"""

    def __init__(self, which: str, epoch: int, value: float):
        self.which = which
        self.epoch = epoch
        self.value = value
        super().__init__(f"non-finite {which} at epoch {epoch}: {value}")


class ShapeMismatch(SemiMolError, ValueError):
    """Operand shapes are incompatible"""


class NotScalar(SemiMolError, ValueError):
    """backward() called on a non-scalar tensor"""


class WidthMismatch(SemiMolError, ValueError):
    """Fingerprints of different widths compared"""
