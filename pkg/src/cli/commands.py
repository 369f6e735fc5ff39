"""
Command implementations behind run_semimol.py.

Each command returns data (paths, frames, summaries) and raises SemiMolError
subclasses; printing and exit codes are the entry point's job.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import config, load_experiment_config
from src.core.errors import ConfigError, MissingMetrics
from src.core.logging_setup import setup_logging
from src.core.run_artifacts import RunArtifacts, default_run_dir
from src.datasets.cliffs import detect_cliffs
from src.datasets.loaders import load_labeled_csv, write_cliff_report
from src.datasets.prepare import load_training_data
from src.datasets.records import CliffPair
from src.ndcore.random import RngStreams
from src.semisup.engine import train
from src.utils.validators import validate_epoch, validate_run_dir, validate_thresholds

# lower-is-better per metric, for the improvement ratio
_LOWER_IS_BETTER = {'rmse': True, 'mae': True, 'roc_auc': False}


# =============================================================================
# TRAIN
# =============================================================================

def cmd_train(config_path: Optional[str] = None, overrides: Sequence[str] = ()) -> Path:
    """Run one experiment end to end and return its run directory"""
    experiment = load_experiment_config(config_path, overrides)
    issues = experiment.validate()
    if issues:
        raise ConfigError(issues)

    run_dir = default_run_dir(config.RUN_ROOT, experiment.name, experiment.strategy, experiment.seed,
                              experiment.output.run_dir)
    artifacts = RunArtifacts(run_dir)
    artifacts.prepare()
    setup_logging(str(run_dir))
    artifacts.save_config(experiment.to_dict())
    logging.info(f"[CLI] Training {experiment.strategy} into {run_dir}")

    streams = RngStreams(experiment.seed)
    data = load_training_data(experiment, streams)
    write_cliff_report(artifacts.cliffs_path, data.cliff_pairs, data.labeled)

    train(experiment, data, streams, artifacts)
    logging.info(f"[CLI] Run complete: {run_dir}")
    return run_dir


# =============================================================================
# COMPARE
# =============================================================================

def _cliff_key(metric: str) -> str:
    return f"cliff_{metric}"


def cmd_compare(run_dirs: Sequence[str], output: Optional[str] = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    One row per run (strategy, seed, overall metric, cliff metric) plus
    per-strategy medians. When a supervised run is present the medians carry
    the relative improvement over it.
    """
    if len(run_dirs) < 2:
        raise ConfigError(f"compare needs at least 2 run directories, got {len(run_dirs)}")

    rows: List[Dict] = []
    for run_dir in run_dirs:
        ok, reason = validate_run_dir(run_dir)
        if not ok:
            raise MissingMetrics(reason)
        metrics = RunArtifacts(run_dir).load_metrics()
        metric = metrics.get('metric')
        rows.append({
            'run': Path(run_dir).name,
            'strategy': metrics.get('strategy'),
            'seed': metrics.get('seed'),
            'task': metrics.get('task'),
            'metric': metric,
            'overall': metrics.get(metric),
            'cliff': metrics.get(_cliff_key(metric)),
        })

    runs = pd.DataFrame(rows, columns=['run', 'strategy', 'seed', 'task', 'metric', 'overall', 'cliff'])
    if runs['task'].nunique() > 1:
        raise ConfigError(f"cannot compare runs of different task types: {sorted(runs['task'].unique())}")
    if runs['metric'].nunique() > 1:
        raise ConfigError(f"cannot compare runs with different metrics: {sorted(runs['metric'].unique())}")

    runs[['overall', 'cliff']] = runs[['overall', 'cliff']].astype(float)
    medians = runs.groupby('strategy', sort=True)[['overall', 'cliff']].median().reset_index()
    medians['runs'] = runs.groupby('strategy', sort=True).size().values

    if 'supervised' in set(medians['strategy']):
        baseline = float(medians.loc[medians['strategy'] == 'supervised', 'overall'].iloc[0])
        lower = _LOWER_IS_BETTER.get(runs['metric'].iloc[0], True)
        if baseline != 0.0:
            gain = (baseline - medians['overall']) if lower else (medians['overall'] - baseline)
            medians['improvement'] = gain / abs(baseline)

    if output:
        out = Path(output)
        out.parent.mkdir(parents=True, exist_ok=True)
        runs.to_csv(out, index=False)
        medians.to_csv(out.with_name(f"{out.stem}_medians{out.suffix or '.csv'}"), index=False)
        logging.info(f"[CLI] Comparison written to {out}")
    return runs, medians


# =============================================================================
# CLIFFS
# =============================================================================

def cmd_cliffs(data_path: str, sim_threshold: float = 0.9, potency_threshold: float = 1.0,
               output: Optional[str] = None, smiles_column: str = 'smiles', label_column: str = 'label',
               workers: int = 1) -> Tuple[List[CliffPair], Dict]:
    """Cliff-pair report for a labeled CSV; returns (pairs, summary)"""
    ok, reason = validate_thresholds(sim_threshold, potency_threshold)
    if not ok:
        raise ConfigError(reason)

    records, dropped = load_labeled_csv(data_path, smiles_column, label_column)
    pairs = detect_cliffs(records, sim_threshold, potency_threshold, workers=workers)
    flagged = sum(1 for r in records if r.cliff_flag)

    if output:
        write_cliff_report(output, pairs, records)

    summary = {
        'data': str(data_path),
        'sim_threshold': sim_threshold,
        'potency_threshold': potency_threshold,
        'records': len(records),
        'dropped': dropped,
        'pairs': len(pairs),
        'flagged': flagged,
    }
    logging.info(f"[CLI] Cliff scan: {summary}")
    return pairs, summary


# =============================================================================
# PSEUDO-LABEL INSPECTION
# =============================================================================

def cmd_pseudo_inspect(run_dir: str, epoch: int, output: Optional[str] = None) -> pd.DataFrame:
    """Per-sample pseudo-label state (sample id, y_hat, p, admitted) at a dumped epoch"""
    ok, reason = validate_epoch(epoch)
    if not ok:
        raise ConfigError(reason)

    dump = RunArtifacts(run_dir).load_pseudo_dump(epoch)
    frame = dump[['sample_id', 'smiles', 'y_hat', 'p', 'admitted', 'gamma']]
    if output:
        frame.to_csv(output, index=False)
        logging.info(f"[CLI] Pseudo-label dump for epoch {epoch} written to {output}")
    return frame
