"""
Tests for the command surface, run artifacts and input validators
"""
import json
import math
from pathlib import Path

import pandas as pd
import pytest

import run_semimol
from config import config
from src.cli.commands import cmd_cliffs, cmd_compare, cmd_pseudo_inspect, cmd_train
from src.core.errors import ConfigError, EpochNotDumped, MissingMetrics
from src.core.logging_setup import teardown_file_logging
from src.core.run_artifacts import PSEUDO_COLUMNS, RUN_LOG_COLUMNS, RunArtifacts, default_run_dir
from src.utils.validators import validate_epoch, validate_run_dir, validate_thresholds

FIXTURES = Path(__file__).resolve().parents[2] / 'data' / 'fixtures'

TINY = [
    f"data.labeled_path={FIXTURES / 'tiny_labeled.csv'}",
    f"data.unlabeled_path={FIXTURES / 'tiny_pool.smi'}",
    'name=cli',
    'model.hidden_dim=8', 'model.num_layers=1', 'model.head_layers=1', 'model.pooling=sum',
    'model.fingerprint_width=64', 'model.instructor_hidden_dim=8', 'model.edge_hidden_dim=8',
    'training.epochs=3', 'training.warmup_epochs_f=2', 'training.warmup_epochs_g=1',
    'training.batch_size=16', 'training.patience=2', 'training.lr=0.01',
    'semimol.k=2', 'output.dump_epochs=[0,2]',
]


@pytest.fixture(scope='module')
def finished_runs(tmp_path_factory):
    """One semimol and one supervised run over the bundled fixtures"""
    root = tmp_path_factory.mktemp('runs')
    dirs = {}
    for strategy in ('semimol', 'supervised'):
        dirs[strategy] = cmd_train(None, TINY + [f'strategy={strategy}', f'output.run_dir={root / strategy}'])
    teardown_file_logging()
    return dirs


class TestValidators:
    """Test command-line input validation"""

    def test_validate_thresholds(self):
        """Test cliff threshold ranges"""
        assert validate_thresholds(0.9, 1.0)[0]
        assert validate_thresholds(1.0, 0.1)[0]
        assert not validate_thresholds(0.0, 1.0)[0]
        assert not validate_thresholds(1.1, 1.0)[0]
        assert not validate_thresholds(0.9, 0.0)[0]
        assert not validate_thresholds(0.9, math.inf)[0]

    def test_validate_run_dir(self, tmp_path):
        """Test a run directory needs metrics.json"""
        assert not validate_run_dir(tmp_path / 'missing')[0]
        assert not validate_run_dir(tmp_path)[0]
        (tmp_path / 'metrics.json').write_text('{}')
        assert validate_run_dir(tmp_path)[0]

    def test_validate_epoch(self):
        """Test epochs must be non-negative integers"""
        assert validate_epoch(0)[0]
        assert not validate_epoch(-1)[0]
        assert not validate_epoch(True)[0]
        assert not validate_epoch('3')[0]


class TestRunArtifacts:
    """Test the run directory layout"""

    def test_default_run_dir(self, tmp_path):
        """Test the derived and the explicit run directory"""
        assert default_run_dir('runs', 'exp', 'semimol', 3) == Path('runs') / 'exp-semimol-seed3'
        assert default_run_dir('runs', 'exp', 'semimol', 3, str(tmp_path)) == tmp_path

    def test_log_rows_append(self, tmp_path):
        """Test the run log keeps one header and fixed column order"""
        artifacts = RunArtifacts(tmp_path)
        artifacts.append_log_row({'epoch': 0, 'loss_f': 1.5})
        artifacts.append_log_row({'epoch': 1, 'loss_f': 1.2, 'gamma': 0.9})
        log = artifacts.load_log()
        assert list(log.columns) == RUN_LOG_COLUMNS
        assert list(log['epoch']) == [0, 1]
        assert math.isnan(log['gamma'].iloc[0])

    def test_metrics_json(self, tmp_path):
        """Test metrics are written with sorted keys and NaN as null"""
        artifacts = RunArtifacts(tmp_path)
        with pytest.raises(MissingMetrics):
            artifacts.load_metrics()
        artifacts.save_metrics({'rmse': 1.0, 'cliff_rmse': float('nan'), 'val': {'mae': float('inf')}})
        assert list(json.loads(artifacts.metrics_path.read_text())) == ['cliff_rmse', 'rmse', 'val']
        assert artifacts.load_metrics() == {'rmse': 1.0, 'cliff_rmse': None, 'val': {'mae': None}}

    def test_prepare_clears_stale_files(self, tmp_path):
        """Test a rerun into the same directory starts clean"""
        artifacts = RunArtifacts(tmp_path)
        artifacts.append_log_row({'epoch': 0})
        artifacts.save_metrics({'rmse': 1.0})
        artifacts.save_pseudo_dump(4, [])
        assert artifacts.dumped_epochs() == [4]
        artifacts.prepare()
        assert not artifacts.log_path.exists()
        assert not artifacts.metrics_path.exists()
        assert artifacts.dumped_epochs() == []

    def test_pseudo_dump(self, tmp_path):
        """Test dumps round through CSV and missing epochs are reported"""
        artifacts = RunArtifacts(tmp_path)
        row = {'sample_id': 0, 'smiles': 'CC', 'y_hat': 0.5, 'p': 0.7, 'admitted': True, 'gamma': 0.6,
               'epoch_assigned': 2}
        artifacts.save_pseudo_dump(2, [row])
        frame = artifacts.load_pseudo_dump(2)
        assert list(frame.columns) == PSEUDO_COLUMNS
        assert bool(frame['admitted'].iloc[0]) is True
        with pytest.raises(EpochNotDumped):
            artifacts.load_pseudo_dump(3)


class TestTrainCommand:
    """Test end-to-end training through the command layer"""

    def test_run_directory_contents(self, finished_runs):
        """Test every artifact of a semimol run is written"""
        artifacts = RunArtifacts(finished_runs['semimol'])
        assert json.loads(artifacts.config_path.read_text())['strategy'] == 'semimol'
        assert artifacts.checkpoint_path('target').exists()
        assert artifacts.checkpoint_path('instructor').exists()
        assert artifacts.cliffs_path.exists()
        assert (finished_runs['semimol'] / config.LOG_FILES['main']).exists()
        assert artifacts.dumped_epochs() == [0, 2]

        metrics = artifacts.load_metrics()
        assert metrics['strategy'] == 'semimol'
        assert metrics['counts']['train'] == 32
        assert metrics['counts']['pool'] == 40
        log = artifacts.load_log()
        assert list(log['epoch']) == list(range(len(log)))
        assert log['gamma'].is_monotonic_decreasing

    def test_supervised_has_no_instructor(self, finished_runs):
        """Test baselines without an instructor write only the target checkpoint"""
        artifacts = RunArtifacts(finished_runs['supervised'])
        assert artifacts.checkpoint_path('target').exists()
        assert not artifacts.checkpoint_path('instructor').exists()
        assert artifacts.load_metrics()['gamma_final'] is None

    def test_rerun_is_byte_identical(self, tmp_path):
        """Test two runs with the same config and seed write byte-identical logs, metrics and dumps"""
        dirs = [cmd_train(None, TINY + ['strategy=semimol', f'output.run_dir={tmp_path / name}'])
                for name in ('first', 'second')]
        teardown_file_logging()
        first, second = (RunArtifacts(d) for d in dirs)
        assert first.log_path.read_bytes() == second.log_path.read_bytes()
        assert first.metrics_path.read_bytes() == second.metrics_path.read_bytes()
        for epoch in (0, 2):
            assert first.pseudo_path(epoch).read_bytes() == second.pseudo_path(epoch).read_bytes()
        assert first.checkpoint_path('target').read_bytes() == second.checkpoint_path('target').read_bytes()

    def test_invalid_override(self, tmp_path):
        """Test a bad override fails before anything is written"""
        with pytest.raises(ConfigError):
            cmd_train(None, TINY + ['semimol.gamma=2.0', f'output.run_dir={tmp_path / "bad"}'])
        assert not (tmp_path / 'bad').exists()


class TestCompareCommand:
    """Test run comparison"""

    def test_compare(self, finished_runs, tmp_path):
        """Test one row per run plus per-strategy medians"""
        out = tmp_path / 'compare.csv'
        runs, medians = cmd_compare([str(finished_runs['semimol']), str(finished_runs['supervised'])], str(out))
        assert list(runs['strategy']) == ['semimol', 'supervised']
        assert set(runs['metric']) == {'rmse'}
        assert list(medians['strategy']) == ['semimol', 'supervised']
        assert 'improvement' in medians.columns
        assert medians.loc[medians['strategy'] == 'supervised', 'improvement'].iloc[0] == 0.0
        assert out.exists()
        assert (tmp_path / 'compare_medians.csv').exists()

    def test_needs_two_runs(self, finished_runs):
        """Test a single run is not a comparison"""
        with pytest.raises(ConfigError):
            cmd_compare([str(finished_runs['semimol'])])

    def test_missing_metrics(self, finished_runs, tmp_path):
        """Test an unfinished run directory is reported"""
        with pytest.raises(MissingMetrics):
            cmd_compare([str(finished_runs['semimol']), str(tmp_path)])

    def test_mixed_tasks_rejected(self, tmp_path):
        """Test runs of different task types cannot be compared"""
        for name, task, metric in (('a', 'regression', 'rmse'), ('b', 'classification', 'roc_auc')):
            RunArtifacts(tmp_path / name).run_dir.mkdir()
            RunArtifacts(tmp_path / name).save_metrics({'strategy': 'supervised', 'seed': 0, 'task': task,
                                                        'metric': metric, metric: 0.5})
        with pytest.raises(ConfigError):
            cmd_compare([str(tmp_path / 'a'), str(tmp_path / 'b')])


class TestCliffsCommand:
    """Test the standalone cliff report"""

    def test_fixture_report(self, tmp_path):
        """Test the bundled fixture yields its planted pair"""
        out = tmp_path / 'cliffs.csv'
        pairs, summary = cmd_cliffs(str(FIXTURES / 'tiny_labeled.csv'), 0.9, 1.0, str(out))
        assert summary['records'] == 40
        assert summary['dropped'] == 0
        assert summary['pairs'] == len(pairs) >= 1
        assert summary['flagged'] >= 2
        frame = pd.read_csv(out)
        assert len(frame) == len(pairs)
        assert list(frame.columns[:4]) == ['i', 'j', 'similarity', 'delta_potency']

    def test_bad_thresholds(self):
        """Test invalid thresholds are a configuration error"""
        with pytest.raises(ConfigError):
            cmd_cliffs(str(FIXTURES / 'tiny_labeled.csv'), 1.5, 1.0)


class TestPseudoInspectCommand:
    """Test pseudo-label inspection"""

    def test_dumped_epoch(self, finished_runs, tmp_path):
        """Test a dumped epoch lists every pool sample"""
        out = tmp_path / 'epoch0.csv'
        frame = cmd_pseudo_inspect(str(finished_runs['semimol']), 0, str(out))
        assert len(frame) == 40
        assert list(frame.columns) == ['sample_id', 'smiles', 'y_hat', 'p', 'admitted', 'gamma']
        assert ((frame['p'] > 0) & (frame['p'] < 1)).all()
        assert out.exists()

    def test_undumped_epoch(self, finished_runs):
        """Test an epoch that was not dumped is reported"""
        with pytest.raises(EpochNotDumped):
            cmd_pseudo_inspect(str(finished_runs['semimol']), 1)

    def test_negative_epoch(self, finished_runs):
        """Test negative epochs are rejected"""
        with pytest.raises(ConfigError):
            cmd_pseudo_inspect(str(finished_runs['semimol']), -1)


class TestMain:
    """Test exit codes of the entry point"""

    def test_bad_override_exit_code(self):
        """Test configuration errors exit with 2"""
        assert run_semimol.main(['--quiet', 'train', 'training.lr']) == 2

    def test_environment_issue_exit_code(self, monkeypatch):
        """Test invalid environment settings exit with 2"""
        monkeypatch.setattr(config, 'WORKERS', 0)
        assert run_semimol.main(['--quiet', 'cliffs', str(FIXTURES / 'tiny_labeled.csv')]) == 2

    def test_data_error_exit_code(self, tmp_path):
        """Test data errors exit with 3"""
        assert run_semimol.main(['--quiet', 'cliffs', str(tmp_path / 'missing.csv'),
                                 '--output', str(tmp_path / 'c.csv')]) == 3
        assert run_semimol.main(['--quiet', 'pseudo-inspect', str(tmp_path), '0']) == 3

    def test_cliffs_success(self, tmp_path):
        """Test a successful command exits with 0"""
        out = tmp_path / 'pairs.csv'
        code = run_semimol.main(['--quiet', 'cliffs', str(FIXTURES / 'tiny_labeled.csv'), '--output', str(out)])
        assert code == 0
        assert out.exists()
