"""
Run directory component for storing and reloading training artifacts.

Layout of one run directory:
    config.json            resolved experiment config (sorted keys)
    run_log.csv            one row per epoch, appended as training proceeds
    metrics.json           final metrics (sorted keys, no timestamps)
    checkpoint_f.bin       best target parameters
    checkpoint_g.bin       best instructor parameters (semimol family)
    cliffs.csv             cliff pairs over the labeled set
    pseudo/epoch_<n>.csv   pseudo-label dumps for the configured epochs
    train.log              log file
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from src.core.errors import EpochNotDumped, MissingMetrics

RUN_LOG_COLUMNS = ['epoch', 'gamma', 'hybrid_size', 'loss_f', 'loss_g', 'val_metric', 'test_metric', 'wall_ms']
PSEUDO_COLUMNS = ['sample_id', 'smiles', 'y_hat', 'p', 'admitted', 'gamma', 'epoch_assigned']


def _clean(value):
    """NaN/Inf -> None so metrics stay valid JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


class RunArtifacts:
    """Reads and writes the files of one run directory"""

    def __init__(self, run_dir):
        self.run_dir = Path(run_dir)

    @property
    def config_path(self) -> Path:
        return self.run_dir / 'config.json'

    @property
    def log_path(self) -> Path:
        return self.run_dir / 'run_log.csv'

    @property
    def metrics_path(self) -> Path:
        return self.run_dir / 'metrics.json'

    @property
    def cliffs_path(self) -> Path:
        return self.run_dir / 'cliffs.csv'

    def checkpoint_path(self, role: str) -> Path:
        return self.run_dir / ('checkpoint_f.bin' if role == 'target' else 'checkpoint_g.bin')

    def pseudo_path(self, epoch: int) -> Path:
        return self.run_dir / 'pseudo' / f'epoch_{epoch}.csv'

    def prepare(self):
        """Create the directory and drop artifacts of a previous run with the same name"""
        self.run_dir.mkdir(parents=True, exist_ok=True)
        for stale in (self.log_path, self.metrics_path):
            if stale.exists():
                stale.unlink()
        pseudo_dir = self.run_dir / 'pseudo'
        if pseudo_dir.exists():
            for old in pseudo_dir.glob('epoch_*.csv'):
                old.unlink()

    # =========================================================================
    # CONFIG / METRICS
    # =========================================================================

    def save_config(self, config_dict: Dict):
        self.run_dir.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, 'w') as f:
            json.dump(config_dict, f, sort_keys=True, indent=2)
            f.write('\n')

    def load_config(self) -> Dict:
        with open(self.config_path, 'r') as f:
            return json.load(f)

    def save_metrics(self, metrics: Dict):
        with open(self.metrics_path, 'w') as f:
            json.dump(_clean(metrics), f, sort_keys=True, indent=2)
            f.write('\n')
        logging.info(f"[CLI] Metrics saved to {self.metrics_path}")

    def load_metrics(self) -> Dict:
        if not self.metrics_path.exists():
            raise MissingMetrics(f"no metrics.json in {self.run_dir}")
        with open(self.metrics_path, 'r') as f:
            return json.load(f)

    # =========================================================================
    # RUN LOG
    # =========================================================================

    def append_log_row(self, row: Dict):
        """Append one epoch; the header is written with the first row"""
        frame = pd.DataFrame([[row.get(c) for c in RUN_LOG_COLUMNS]], columns=RUN_LOG_COLUMNS)
        write_header = not self.log_path.exists()
        frame.to_csv(self.log_path, mode='a', header=write_header, index=False)

    def load_log(self) -> pd.DataFrame:
        return pd.read_csv(self.log_path)

    # =========================================================================
    # PSEUDO-LABEL DUMPS
    # =========================================================================

    def save_pseudo_dump(self, epoch: int, rows: List[Dict]):
        path = self.pseudo_path(epoch)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=PSEUDO_COLUMNS).to_csv(path, index=False)
        logging.debug(f"[SEMIMOL] Pseudo-label dump for epoch {epoch} written to {path}")

    def dumped_epochs(self) -> List[int]:
        pseudo_dir = self.run_dir / 'pseudo'
        if not pseudo_dir.exists():
            return []
        return sorted(int(p.stem.split('_', 1)[1]) for p in pseudo_dir.glob('epoch_*.csv'))

    def load_pseudo_dump(self, epoch: int) -> pd.DataFrame:
        path = self.pseudo_path(epoch)
        if not path.exists():
            raise EpochNotDumped(f"epoch {epoch} was not dumped in {self.run_dir} (dumped: {self.dumped_epochs()})")
        return pd.read_csv(path)


def default_run_dir(root, name: str, strategy: str, seed: int, explicit: Optional[str] = None) -> Path:
    """<root>/<name>-<strategy>-seed<seed> unless an explicit directory is configured"""
    if explicit:
        return Path(explicit)
    return Path(root) / f"{name}-{strategy}-seed{seed}"
