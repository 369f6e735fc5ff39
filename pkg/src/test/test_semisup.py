"""
Unit and integration tests for pseudo-labelling, the threshold controller,
objectives and the training engine
"""
import math

import numpy as np
import pytest

from config.experiment_config import ExperimentConfig
from src.core.errors import EmptyDataset, NonFiniteLoss, ShapeMismatch
from src.core.run_artifacts import PSEUDO_COLUMNS, RunArtifacts
from src.datasets import LabeledRecord, TrainingData, build_training_data
from src.datasets.synthetic import motif_pool, motif_task
from src.models import FusionStats, InstructorModel, ModelSpec, TargetModel, collate, encode_smiles, init_params
from src.ndcore import RngStreams, Tape, Tensor, backward, bce, mae, mse
from src.semisup import (
    CurriculumState, PseudoSample, SemiMolTrainer, admit_top_fraction, assign_pseudo_labels,
    build_full_set, build_hybrid_set, class_weights, consistency_loss, curriculum_step, instructor_loss,
    percentile_fraction, score_confidences, target_loss, train, train_baseline, train_semimol, with_confidences,
)
from src.utils.early_stopping import EarlyStopping


def _experiment(strategy='semimol', **sections):
    data = {
        'name': 'unit',
        'seed': 0,
        'strategy': strategy,
        'model': {'backbone': 'gin', 'hidden_dim': 8, 'num_layers': 1, 'head_layers': 1, 'dropout': 0.1,
                  'fingerprint_width': 64, 'instructor_hidden_dim': 8, 'pooling': 'sum'},
        'training': {'epochs': 3, 'warmup_epochs_f': 2, 'warmup_epochs_g': 1, 'batch_size': 16,
                     'patience': 2, 'lr': 0.01, 'workers': 1},
        'semimol': {'k': 2},
        'output': {'save_checkpoints': False},
    }
    for name, values in sections.items():
        if isinstance(values, dict):
            data.setdefault(name, {}).update(values)
        else:
            data[name] = values
    return ExperimentConfig.from_dict(data)


def _data(experiment, n=40, m=30):
    return build_training_data(motif_task(n, seed=0), motif_pool(m, seed=1), experiment, RngStreams(experiment.seed))


def _pool(ps):
    return tuple(PseudoSample(i, float(i), p) for i, p in enumerate(ps))


def _small_spec():
    return ModelSpec(hidden_dim=4, num_layers=1, head_layers=1, dropout=0.0, fingerprint_width=64,
                     instructor_hidden_dim=4)


class TestCurriculum:
    """Test the self-adaptive threshold controller"""

    def test_improvement_lowers_gamma(self):
        """Test an improving validation score lowers gamma by delta_gamma"""
        state = CurriculumState(gamma=0.9, delta_gamma=0.05, s_prev=1.0, epoch=1)
        state = curriculum_step(state, 0.8)
        assert state.gamma == pytest.approx(0.85)
        assert state.s_prev == 0.8
        assert state.epoch == 2

    def test_first_epoch_never_moves(self):
        """Test epoch 0 only records the score"""
        state = curriculum_step(CurriculumState(gamma=0.9), 0.1)
        assert state.gamma == 0.9
        assert state.s_prev == 0.1

    def test_worse_or_equal_keeps_gamma(self):
        """Test non-improving scores leave gamma alone"""
        state = CurriculumState(gamma=0.9, s_prev=1.0, epoch=3)
        assert curriculum_step(state, 1.0).gamma == 0.9
        assert curriculum_step(state, 1.5).gamma == 0.9

    def test_clamped_at_gamma_min(self):
        """Test gamma never drops below gamma_min"""
        state = CurriculumState(gamma=0.52, delta_gamma=0.05, s_prev=1.0, epoch=1, gamma_min=0.5)
        assert curriculum_step(state, 0.5).gamma == 0.5

    def test_higher_is_better(self):
        """Test AUC-style scores are negated before comparison"""
        state = curriculum_step(CurriculumState(gamma=0.9), 0.7, lower_is_better=False)
        state = curriculum_step(state, 0.8, lower_is_better=False)
        assert state.gamma == pytest.approx(0.85)

    def test_monotone(self):
        """Test gamma is non-increasing and bounded for any score sequence"""
        rng = np.random.default_rng(0)
        state = CurriculumState(gamma=0.9, delta_gamma=0.07, gamma_min=0.1)
        previous = state.gamma
        for s in rng.normal(size=200):
            state = curriculum_step(state, float(s))
            assert state.gamma <= previous
            assert 0.1 <= state.gamma <= 0.9
            previous = state.gamma

    def test_non_finite_score(self):
        """Test a NaN score is rejected"""
        with pytest.raises(ValueError):
            curriculum_step(CurriculumState(), float('nan'))

    def test_percentile_ramp(self):
        """Test the admitted fraction ramps linearly from start to end"""
        assert percentile_fraction(0, 10, 0.1, 1.0) == pytest.approx(0.1)
        assert percentile_fraction(9, 10, 0.1, 1.0) == pytest.approx(1.0)
        assert percentile_fraction(0, 1, 0.1, 1.0) == 1.0


class TestHybridSet:
    """Test hybrid-set construction and class weights"""

    def test_threshold_admission(self):
        """Test admission is p >= gamma, keeping every labeled member"""
        labeled = ['a', 'b']
        hybrid = build_hybrid_set(labeled, _pool([0.2, 0.9, 0.5, 0.95]), 0.5)
        assert [s.index for s in hybrid.pseudo] == [1, 2, 3]
        assert hybrid.num_labeled == 2
        assert hybrid.size == 5
        assert list(hybrid.observability()) == [1, 1, 0, 0, 0]
        assert list(hybrid.pseudo_mask()) == [False, False, True, True, True]

    def test_matches_predicate(self):
        """Test random pools against direct filtering by p >= gamma"""
        rng = np.random.default_rng(0)
        for _ in range(200):
            ps = np.round(rng.random(int(rng.integers(0, 25))), 2)
            gamma = float(np.round(rng.random(), 2))
            hybrid = build_hybrid_set(['x'], _pool(ps), gamma)
            assert [s.index for s in hybrid.pseudo] == [i for i, p in enumerate(ps) if p >= gamma]

    def test_extreme_thresholds(self):
        """Test gamma 0 admits everything and gamma 1 admits nothing below 1"""
        pool = _pool([0.0, 0.3, 1.0 - 1e-12])
        assert build_hybrid_set([], pool, 0.0).size == 3
        assert build_hybrid_set([], pool, 1.0).size == 0
        assert build_full_set(['x'], pool).size == 4

    def test_invalid_gamma(self):
        """Test gamma outside [0, 1] is rejected"""
        with pytest.raises(ValueError):
            build_hybrid_set([], (), 1.5)

    def test_top_fraction(self):
        """Test top-q admission with ties broken by pool index"""
        pool = _pool([0.5, 0.9, 0.5, 0.1])
        hybrid, cutoff = admit_top_fraction(['a'], pool, 0.5)
        assert [s.index for s in hybrid.pseudo] == [0, 1]
        assert cutoff == 0.5
        hybrid, cutoff = admit_top_fraction(['a'], pool, 0.0)
        assert hybrid.size == 1
        assert math.isnan(cutoff)
        hybrid, _ = admit_top_fraction(['a'], pool, 0.6)
        assert len(hybrid.pseudo) == 3

    def test_class_weights_balanced(self):
        """Test both classes get equal total weight and the mean is one"""
        c = np.array([1, 0, 0, 0], dtype=float)
        w = class_weights(c)
        assert w.mean() == pytest.approx(1.0)
        assert w[c == 1].sum() == pytest.approx(w[c == 0].sum())
        assert np.array_equal(class_weights(np.ones(3)), np.ones(3))


class TestObjectives:
    """Test the target and instructor objectives"""

    def test_perfect_fit_is_zero(self):
        """Test L_f = 0 when predictions match every target"""
        pred = Tensor([1.0, 2.0, 3.0])
        loss = target_loss(pred, np.array([1.0, 2.0, 3.0]), np.array([False, True, True]), 0.7, mse)
        assert loss.item() == 0.0

    def test_labeled_plus_weighted_pseudo(self):
        """Test L_f is the labeled mean plus lambda times the pseudo mean"""
        pred = Tensor([0.0, 0.0, 0.0])
        targets = np.array([1.0, 2.0, 4.0])
        mask = np.array([False, True, True])
        loss = target_loss(pred, targets, mask, 0.5, mae)
        assert loss.item() == pytest.approx(1.0 + 0.5 * 3.0)
        assert target_loss(pred, targets, mask, 0.0, mae).item() == pytest.approx(1.0)

    def test_only_pseudo_members(self):
        """Test a batch without labeled rows uses the pseudo term alone"""
        loss = target_loss(Tensor([0.0]), np.array([2.0]), np.array([True]), 0.5, mae)
        assert loss.item() == pytest.approx(1.0)

    def test_target_loss_errors(self):
        """Test empty and mismatched inputs"""
        with pytest.raises(EmptyDataset):
            target_loss(Tensor(np.zeros(0)), np.zeros(0), np.zeros(0, dtype=bool), 1.0, mse)
        with pytest.raises(ShapeMismatch):
            target_loss(Tensor([1.0, 2.0]), np.array([1.0]), np.array([False]), 1.0, mse)

    def test_instructor_loss(self):
        """Test the instructor loss is class-weighted BCE"""
        p = Tensor([0.5, 0.5, 0.5])
        c = np.array([1.0, 0.0, 0.0])
        assert instructor_loss(p, c).item() == pytest.approx(math.log(2.0))
        expected = bce(p, Tensor(c), class_weights(c)).item()
        assert instructor_loss(p, c).item() == pytest.approx(expected)

    def test_instructor_gradient_stays_in_g(self):
        """Test the instructor objective yields no gradient for the target parameters"""
        spec = _small_spec()
        params = init_params(spec, RngStreams(0))
        model = InstructorModel(spec)
        mols = [encode_smiles(s, 2, 64) for s in ("CCO", "CCN")]
        batch = collate(mols)
        y = np.array([0.1, 0.2])
        hf = np.array([0.3, 0.4])
        f_tensors = list(params.target.values())
        with Tape() as tape:
            p = model.forward(params.instructor, batch, y, hf, FusionStats.from_arrays(y, hf))
            loss = instructor_loss(p, np.array([1.0, 0.0]))
        grads = backward(tape, loss, f_tensors)
        assert all(not g.any() for g in grads)

    def test_consistency(self):
        """Test the consistency term is the mean squared difference"""
        assert consistency_loss(Tensor([1.0, 2.0]), Tensor([1.0, 2.0])).item() == 0.0
        assert consistency_loss(Tensor([0.0, 0.0]), Tensor([1.0, 3.0])).item() == pytest.approx(5.0)


class TestInference:
    """Test pseudo-label refresh and confidence scoring"""

    def setup_method(self):
        self.spec = _small_spec()
        self.params = init_params(self.spec, RngStreams(0))
        self.target = TargetModel(self.spec)
        self.instructor = InstructorModel(self.spec)
        self.mols = [encode_smiles(s, 2, 64) for s in ("C", "CC", "CCO", "c1ccccc1", "CCN", "OCCO", "CCCl")]

    def test_refresh_cadence(self):
        """Test pseudo-labels refresh only on multiples of k"""
        first = assign_pseudo_labels(self.target, self.params.target, self.mols, (), epoch=0, k=3)
        assert len(first) == len(self.mols)
        assert all(s.p == 0.5 and s.c == 0 and s.epoch_assigned == 0 for s in first)
        scored = with_confidences(first, np.linspace(0.1, 0.7, len(first)))
        kept = assign_pseudo_labels(self.target, self.params.target, self.mols, scored, epoch=2, k=3)
        assert kept == scored
        refreshed = assign_pseudo_labels(self.target, self.params.target, self.mols, scored, epoch=3, k=3)
        assert [s.p for s in refreshed] == [s.p for s in scored]
        assert all(s.epoch_assigned == 3 for s in refreshed)

    def test_invalid_k(self):
        """Test k must be positive"""
        with pytest.raises(ValueError):
            assign_pseudo_labels(self.target, self.params.target, self.mols, (), epoch=0, k=0)

    def test_classification_hard_labels(self):
        """Test classification pseudo-labels are 0/1"""
        pool = assign_pseudo_labels(self.target, self.params.target, self.mols, (), 0, 1, 'classification')
        assert {s.y_hat for s in pool} <= {0.0, 1.0}

    def test_scores_in_open_interval(self):
        """Test confidences are strictly inside (0, 1)"""
        y = np.linspace(-1.0, 1.0, len(self.mols))
        p, hf, stats = score_confidences(self.instructor, self.params.instructor, self.target, self.params.target,
                                         self.mols, y, 'rmse')
        assert p.shape == (len(self.mols),)
        assert np.all((p > 0.0) & (p < 1.0))
        assert np.all(hf >= 0.0)
        assert isinstance(stats, FusionStats)

    def test_workers_preserve_order(self):
        """Test threaded scoring returns the serial result"""
        y = np.linspace(-1.0, 1.0, len(self.mols))
        args = (self.instructor, self.params.instructor, self.target, self.params.target, self.mols, y, 'mse')
        serial, _, _ = score_confidences(*args, batch_size=2, workers=1)
        threaded, _, _ = score_confidences(*args, batch_size=2, workers=3)
        assert np.array_equal(serial, threaded)


class TestEngine:
    """Integration tests of the training strategies"""

    def test_semimol_run(self):
        """Test the semimol log: gamma non-increasing, hybrid set between N and N + M"""
        experiment = _experiment('semimol', semimol={'gamma': 0.6, 'delta_gamma': 0.1})
        data = _data(experiment)
        result = train(experiment, data, RngStreams(0))
        n, m = len(data.train), len(data.pool)
        assert len(result.log) == 3
        gammas = [r.gamma for r in result.log]
        assert gammas == sorted(gammas, reverse=True)
        assert all(n <= r.hybrid_size <= n + m for r in result.log)
        assert all(math.isfinite(r.loss_f) and math.isfinite(r.loss_g) for r in result.log)
        assert result.gamma_final <= 0.6
        assert len(result.pseudo_pool) == m
        assert result.instructor_params is not None
        for key in ('rmse', 'mae', 'val', 'test', 'gamma_final', 'best_epoch', 'strategy', 'seed'):
            assert key in result.metrics

    def test_deterministic(self):
        """Test equal seeds reproduce the parameter trajectory"""
        experiment = _experiment('semimol')
        a = train(experiment, _data(experiment), RngStreams(0))
        b = train(experiment, _data(experiment), RngStreams(0))
        assert [r.f_digest for r in a.log] == [r.f_digest for r in b.log]
        assert a.metrics['val'] == b.metrics['val']

    def test_no_admission_matches_supervised(self):
        """Test a threshold nobody reaches reproduces the supervised trajectory exactly"""
        semi = _experiment('semimol', semimol={'gamma': 1.0, 'gamma_min': 1.0})
        sup = _experiment('supervised')
        a = train(semi, _data(semi), RngStreams(0))
        b = train(sup, _data(sup), RngStreams(0))
        assert [r.f_digest for r in a.log] == [r.f_digest for r in b.log]
        assert all(r.hybrid_size == len(_data(sup).train) for r in a.log)
        assert a.metrics['rmse'] == b.metrics['rmse']

    def test_supervised_log(self):
        """Test supervised rows carry no gamma and the training-split size"""
        experiment = _experiment('supervised')
        data = _data(experiment)
        result = train_baseline('supervised', experiment, data, RngStreams(0))
        assert all(math.isnan(r.gamma) and math.isnan(r.loss_g) for r in result.log)
        assert all(r.hybrid_size == len(data.train) for r in result.log)
        assert result.gamma_final is None
        assert result.instructor_params is None

    def test_pi_model(self):
        """Test the pi-model sweeps labeled plus pool members"""
        experiment = _experiment('pi_model')
        data = _data(experiment)
        result = train(experiment, data, RngStreams(0))
        assert all(r.hybrid_size == len(data.train) + len(data.pool) for r in result.log)
        assert all(math.isfinite(r.loss_f) for r in result.log)

    def test_percentile_ramp(self):
        """Test the percentile baseline admits ceil(q * M) samples on a linear ramp"""
        experiment = _experiment('percentile', semimol={'percentile_start': 0.1, 'percentile_end': 1.0})
        data = _data(experiment, m=30)
        n = len(data.train)
        result = train(experiment, data, RngStreams(0))
        assert [r.hybrid_size - n for r in result.log] == [3, 17, 30]
        assert result.gamma_final == result.log[-1].gamma

    def test_fixed_threshold(self):
        """Test the fixed-threshold baseline keeps gamma constant"""
        experiment = _experiment('fixed_threshold', semimol={'gamma': 0.3})
        result = train(experiment, _data(experiment), RngStreams(0))
        assert all(r.gamma == 0.3 for r in result.log)
        assert result.gamma_final == 0.3

    def test_best_checkpoint_restored(self):
        """Test final validation metrics come from the best epoch"""
        experiment = _experiment('supervised', training={'epochs': 4})
        result = train(experiment, _data(experiment), RngStreams(0))
        final_val = result.metrics['val']['rmse']
        scores = [r.val_metric for r in result.log]
        if result.best_epoch >= 0:
            assert final_val == pytest.approx(scores[result.best_epoch])
        assert final_val <= min(scores) + 1e-12

    def test_classification(self):
        """Test a classification run reports ROC-AUC"""
        records = [LabeledRecord('c1ccccc1' + 'C' * j, 1.0) for j in range(20)]
        records += [LabeledRecord('C' * (j + 1) + 'O', 0.0) for j in range(20)]
        experiment = _experiment('semimol', task='classification', metric='roc_auc')
        data = build_training_data(records, motif_pool(20, seed=2), experiment, RngStreams(0))
        result = train(experiment, data, RngStreams(0))
        assert 0.0 <= result.metrics['val']['roc_auc'] <= 1.0
        assert result.metrics['label_std'] == 1.0
        assert {s.y_hat for s in result.pseudo_pool} <= {0.0, 1.0}

    def test_artifacts(self, tmp_path):
        """Test run log, metrics, checkpoints and pseudo-label dumps"""
        experiment = _experiment('semimol', output={'dump_epochs': [0, 2], 'save_checkpoints': True})
        artifacts = RunArtifacts(tmp_path / 'run')
        artifacts.prepare()
        train(experiment, _data(experiment), RngStreams(0), artifacts)

        log = artifacts.load_log()
        assert list(log['epoch']) == [0, 1, 2]
        assert artifacts.load_metrics()['strategy'] == 'semimol'
        assert artifacts.checkpoint_path('target').exists()
        assert artifacts.checkpoint_path('instructor').exists()
        assert artifacts.dumped_epochs() == [0, 2]

        dump = artifacts.load_pseudo_dump(2)
        assert list(dump.columns) == PSEUDO_COLUMNS
        assert len(dump) == 30
        gamma = float(dump['gamma'].iloc[0])
        assert list(dump['admitted']) == list(dump['p'] >= gamma)

    def test_non_finite_loss_keeps_earlier_rows(self, tmp_path, monkeypatch):
        """Test a numeric abort leaves the rows of finished epochs on disk"""
        experiment = _experiment('supervised', training={'warmup_epochs_f': 0})
        artifacts = RunArtifacts(tmp_path / 'run')
        artifacts.prepare()
        trainer = SemiMolTrainer(experiment, _data(experiment), RngStreams(0), artifacts)
        original = trainer._sweep_f

        def failing(molecules, targets, mask, lam, epoch):
            if epoch == 1:
                trainer._check_finite('loss_f', epoch, float('nan'))
            return original(molecules, targets, mask, lam, epoch)

        monkeypatch.setattr(trainer, '_sweep_f', failing)
        with pytest.raises(NonFiniteLoss) as exc:
            trainer.run()
        assert exc.value.epoch == 1
        assert list(artifacts.load_log()['epoch']) == [0]

    def test_nan_label_aborts(self):
        """Test a NaN training label aborts with NonFiniteLoss"""
        train_split = [LabeledRecord('CCO', 1.0), LabeledRecord('CCN', float('nan')), LabeledRecord('CCC', 0.5)]
        val_split = [LabeledRecord('CCCC', 0.2), LabeledRecord('CCCO', 0.4)]
        experiment = _experiment('supervised')
        with pytest.raises(NonFiniteLoss):
            train(experiment, TrainingData(train_split, val_split, []), RngStreams(0))

    def test_empty_splits(self):
        """Test empty training or validation splits are rejected"""
        experiment = _experiment('supervised')
        with pytest.raises(EmptyDataset):
            SemiMolTrainer(experiment, TrainingData([], [LabeledRecord('CC', 1.0)], []))
        with pytest.raises(EmptyDataset):
            SemiMolTrainer(experiment, TrainingData([LabeledRecord('CC', 1.0)], [], []))

    def test_entry_point_guards(self):
        """Test strategy guards of the entry points"""
        experiment = _experiment('supervised')
        data = _data(experiment)
        with pytest.raises(ValueError):
            train_semimol(experiment, data)
        with pytest.raises(ValueError):
            train_baseline('semimol', experiment, data)

    def test_no_pool(self):
        """Test an empty unlabeled pool reproduces the supervised trajectory exactly"""
        experiment = _experiment('semimol')
        data = _data(experiment, m=0)
        result = train(experiment, data, RngStreams(0))
        assert all(r.hybrid_size == len(data.train) for r in result.log)

        sup = _experiment('supervised')
        baseline = train(sup, _data(sup, m=0), RngStreams(0))
        assert [r.f_digest for r in result.log] == [r.f_digest for r in baseline.log]
        assert result.metrics['rmse'] == baseline.metrics['rmse']


class TestEarlyStopping:
    """Test the warm-up patience counter"""

    def test_trips_after_patience(self):
        """Test the stopper trips after `patience` epochs without improvement"""
        stopper = EarlyStopping(patience=2)
        assert stopper.record(0, 1.0)
        assert stopper.record(1, 0.5)
        assert not stopper.record(2, 0.7)
        assert not stopper.should_stop()
        assert not stopper.record(3, 0.5)
        assert stopper.should_stop()
        assert (stopper.best_epoch, stopper.best_score) == (1, 0.5)

    def test_higher_is_better(self):
        """Test AUC-style metrics improve upward"""
        stopper = EarlyStopping(patience=1, lower_is_better=False)
        stopper.record(0, 0.6)
        assert stopper.record(1, 0.7)
        assert not stopper.record(2, 0.65)
        assert stopper.should_stop()

    def test_non_finite_never_best(self):
        """Test NaN scores never count as improvements"""
        stopper = EarlyStopping(patience=3)
        assert not stopper.record(0, float('nan'))
        assert stopper.best_score is None

    def test_invalid_patience(self):
        """Test patience must be positive"""
        with pytest.raises(ValueError):
            EarlyStopping(patience=0)
