"""
SemiMol training engine and comparison strategies.

One trainer object owns the models, their parameters, the optimizer states
and the named random streams. Every strategy shares the warm-up of the
target model and the same minibatch sweep, so strategies differ only in
what they feed that sweep:

    semimol          instructor-filtered hybrid set, self-adaptive gamma
    fixed_threshold  instructor-filtered hybrid set, constant gamma
    percentile       top-q fraction of pseudo samples by confidence, q on a linear ramp
    supervised       labeled training split only
    pi_model         labeled loss plus dropout consistency over labeled + pool
"""

import logging
import math
import time
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import config
from src.chemgraph.smiles import parse_smiles
from src.core.errors import EmptyDataset, NonFiniteLoss, SingleClass, EmptyStratum, DataError
from src.core.run_artifacts import RunArtifacts
from src.datasets.metrics import METRIC_FUNCTIONS, evaluate
from src.datasets.prepare import TrainingData
from src.models.batching import EncodedMolecule, encode_graph, iter_batches
from src.models.checkpoint import save_checkpoint
from src.models.instructor import FusionStats, InstructorModel
from src.models.params import init_params, params_digest, restore, snapshot
from src.models.spec import ModelSpec
from src.models.target import TargetModel
from src.ndcore import tensor as T
from src.ndcore.losses import target_loss_fn
from src.ndcore.optim import OptimizerState, adam_step
from src.ndcore.random import RngStreams
from src.ndcore.tensor import Tape
from src.semisup.curriculum import curriculum_step, percentile_fraction
from src.semisup.hybrid import admit_top_fraction, build_hybrid_set, class_weights
from src.semisup.inference import assign_pseudo_labels, predict_target, score_confidences, with_confidences
from src.semisup.objectives import consistency_loss, instructor_loss, target_loss
from src.semisup.types import CurriculumState, EpochRecord, PseudoSample, TrainResult
from src.utils.early_stopping import EarlyStopping

SEMIMOL_FAMILY = ('semimol', 'fixed_threshold', 'percentile')
BASELINES = ('supervised', 'pi_model', 'fixed_threshold', 'percentile')
_STD_FLOOR = 1e-12
NAN = float('nan')


def _encode(records, radius: int, width: int) -> List[EncodedMolecule]:
    return [encode_graph(r.graph if r.graph is not None else parse_smiles(r.smiles), radius, width)
            for r in records]


class SemiMolTrainer:
    """
    Trains the target model f (and, for the SemiMol family, the instructor g)
    on prepared data. Call `run()` once.
    """

    def __init__(self, experiment, data: TrainingData, streams: Optional[RngStreams] = None,
                 artifacts: Optional[RunArtifacts] = None):
        self.experiment = experiment
        self.strategy = experiment.strategy
        self.task = experiment.task
        self.data = data
        self.streams = streams or RngStreams(experiment.seed)
        self.artifacts = artifacts
        self.training = experiment.training
        self.semi = experiment.semimol

        if not data.train:
            raise EmptyDataset("training split is empty")
        if not data.val:
            raise EmptyDataset("validation split is empty")

        self.spec = ModelSpec.from_config(experiment)
        self.target = TargetModel(self.spec)
        self.instructor = InstructorModel(self.spec)
        self.params = init_params(self.spec, self.streams)
        self.opt_f = self._optimizer_state()
        self.opt_g = self._optimizer_state()
        self.loss_fn = target_loss_fn(self.training.loss, self.task)
        self.lower_is_better = experiment.lower_is_better
        self.workers = max(1, self.training.workers)

        # label standardisation (regression only)
        train_y = np.array([r.y for r in data.train], dtype=np.float64)
        if self.task == 'regression':
            std = float(train_y.std())
            self.y_mean, self.y_std = float(train_y.mean()), (std if std > _STD_FLOOR else 1.0)
        else:
            self.y_mean, self.y_std = 0.0, 1.0

        m = experiment.model
        self.train_mols = _encode(data.train, m.fingerprint_radius, m.fingerprint_width)
        self.val_mols = _encode(data.val, m.fingerprint_radius, m.fingerprint_width)
        self.test_mols = _encode(data.test, m.fingerprint_radius, m.fingerprint_width)
        self.pool_mols = _encode(data.pool, m.fingerprint_radius, m.fingerprint_width)

        self.train_y = self._standardize(train_y)
        self.val_y = np.array([r.y for r in data.val], dtype=np.float64)
        self.test_y = np.array([r.y for r in data.test], dtype=np.float64)

        self.log: List[EpochRecord] = []
        self.pool: Tuple[PseudoSample, ...] = ()

        logging.info(f"[SEMIMOL] Trainer ready: strategy={self.strategy}, task={self.task}, "
                     f"N={len(self.train_mols)}, val={len(self.val_mols)}, test={len(self.test_mols)}, "
                     f"M={len(self.pool_mols)}, target params={self.target.parameter_count()}")

    def _optimizer_state(self) -> OptimizerState:
        t = self.training
        return OptimizerState(lr=t.lr, beta1=t.beta1, beta2=t.beta2, eps=t.adam_eps)

    # =========================================================================
    # UNITS AND EVALUATION
    # =========================================================================

    def _standardize(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.y_mean) / self.y_std

    def _destandardize(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.y_std + self.y_mean

    def predict(self, molecules: Sequence[EncodedMolecule]) -> np.ndarray:
        """Eval-mode predictions in original label units (logits for classification)"""
        raw = predict_target(self.target, self.params.target, molecules, workers=self.workers)
        return self._destandardize(raw)

    def _metric(self, molecules, y) -> float:
        if not molecules:
            return NAN
        try:
            return float(METRIC_FUNCTIONS[self.experiment.metric](self.predict(molecules), y))
        except (SingleClass, EmptyStratum) as e:
            raise DataError(f"{self.experiment.metric} is undefined on this split: {e}")

    def val_metric(self) -> float:
        return self._metric(self.val_mols, self.val_y)

    def test_metric(self) -> float:
        """Reported only; NaN when the test split is empty or the metric is undefined on it"""
        try:
            return self._metric(self.test_mols, self.test_y)
        except DataError:
            return NAN

    # =========================================================================
    # SWEEPS
    # =========================================================================

    def _check_finite(self, which: str, epoch: int, value: float):
        if not math.isfinite(value):
            logging.error(f"[SEMIMOL] Non-finite {which} at epoch {epoch}: {value}")
            raise NonFiniteLoss(which, epoch, value)

    def _sweep_f(self, molecules: Sequence[EncodedMolecule], targets: np.ndarray, pseudo_mask: np.ndarray,
                 lam: float, epoch: int) -> float:
        """One shuffled minibatch pass of f; returns the mean batch loss"""
        order = self.streams.get('shuffle/f').permutation(len(molecules))
        rng = self.streams.get('dropout/f')
        names = list(self.params.target)
        tensors = [self.params.target[n] for n in names]
        losses = []

        for chunk, batch in iter_batches(molecules, self.training.batch_size, order):
            with Tape() as tape:
                pred = self.target.forward(self.params.target, batch, training=True, rng=rng)
                loss = target_loss(pred, targets[chunk], pseudo_mask[chunk], lam, self.loss_fn)
            value = loss.item()
            self._check_finite('loss_f', epoch, value)
            grads = tape.backward(loss, tensors)
            adam_step(self.params.target, dict(zip(names, grads)), self.opt_f)
            losses.append(value)

        return float(np.mean(losses)) if losses else NAN

    def _sweep_g(self, molecules: Sequence[EncodedMolecule], y: np.ndarray, hf: np.ndarray, c: np.ndarray,
                 stats: FusionStats, epoch: int) -> float:
        """One shuffled minibatch pass of g over D' against the observability mask"""
        weights = class_weights(c)
        order = self.streams.get('shuffle/g').permutation(len(molecules))
        rng = self.streams.get('dropout/g')
        names = list(self.params.instructor)
        tensors = [self.params.instructor[n] for n in names]
        losses = []

        for chunk, batch in iter_batches(molecules, self.training.batch_size, order):
            with Tape() as tape:
                p = self.instructor.forward(self.params.instructor, batch, y[chunk], hf[chunk], stats,
                                            training=True, rng=rng)
                loss = instructor_loss(p, c[chunk], weights[chunk])
            value = loss.item()
            self._check_finite('loss_g', epoch, value)
            grads = tape.backward(loss, tensors)
            adam_step(self.params.instructor, dict(zip(names, grads)), self.opt_g)
            losses.append(value)

        return float(np.mean(losses)) if losses else NAN

    def _sweep_pi(self, epoch: int) -> float:
        """Supervised loss on labeled members plus dropout consistency on every member"""
        molecules = self.train_mols + self.pool_mols
        n_labeled = len(self.train_mols)
        order = self.streams.get('shuffle/f').permutation(len(molecules))
        rng = self.streams.get('dropout/f')
        names = list(self.params.target)
        tensors = [self.params.target[n] for n in names]
        weight = self.semi.consistency_weight
        losses = []

        for chunk, batch in iter_batches(molecules, self.training.batch_size, order):
            with Tape() as tape:
                first = self.target.forward(self.params.target, batch, training=True, rng=rng)
                second = self.target.forward(self.params.target, batch, training=True, rng=rng)
                loss = T.mul(consistency_loss(first, second), weight)
                labeled = np.flatnonzero(chunk < n_labeled)
                if labeled.size:
                    supervised = self.loss_fn(T.take_rows(first, labeled), T.Tensor(self.train_y[chunk[labeled]]))
                    loss = T.add(supervised, loss)
            value = loss.item()
            self._check_finite('loss_f', epoch, value)
            grads = tape.backward(loss, tensors)
            adam_step(self.params.target, dict(zip(names, grads)), self.opt_f)
            losses.append(value)

        return float(np.mean(losses)) if losses else NAN

    # =========================================================================
    # WARM-UP
    # =========================================================================

    def warmup_target(self) -> Optional[float]:
        """Supervised training of f with early stopping; the best epoch's parameters are kept"""
        epochs = self.training.warmup_epochs_f
        if epochs <= 0:
            logging.info("[WARMUP] Target warm-up skipped (0 epochs)")
            return None

        stopper = EarlyStopping(self.training.patience, self.lower_is_better)
        best = snapshot(self.params.target)
        mask = np.zeros(len(self.train_mols), dtype=bool)
        for epoch in tqdm(range(epochs), desc='warmup f', disable=not config.SHOW_PROGRESS):
            loss = self._sweep_f(self.train_mols, self.train_y, mask, 0.0, epoch)
            score = self.val_metric()
            if stopper.record(epoch, score):
                best = snapshot(self.params.target)
            logging.debug(f"[WARMUP] f epoch {epoch}: loss={loss:.6f}, val={score:.6f}")
            if stopper.should_stop():
                break

        restore(self.params.target, best)
        logging.info(f"[WARMUP] Target warm-up done: best val {stopper.best_score} at epoch {stopper.best_epoch}")
        return stopper.best_score

    def _d_prime(self, pool: Sequence[PseudoSample]):
        molecules = self.train_mols + [self.pool_mols[s.index] for s in pool]
        y = np.concatenate([self.train_y, np.array([s.y_hat for s in pool], dtype=np.float64)])
        c = np.concatenate([np.ones(len(self.train_mols)), np.zeros(len(pool))])
        return molecules, y, c

    def warmup_instructor(self) -> float:
        """Pseudo-label the pool with f0, then train g on D' for warmup_epochs_g passes"""
        self.pool = self.refresh(epoch=0)
        molecules, y, c = self._d_prime(self.pool)
        _, hf, stats = self._score(molecules, y)

        loss = NAN
        for epoch in range(self.training.warmup_epochs_g):
            loss = self._sweep_g(molecules, y, hf, c, stats, epoch)
            logging.debug(f"[WARMUP] g epoch {epoch}: loss={loss:.6f}")
        logging.info(f"[WARMUP] Instructor warm-up done: {self.training.warmup_epochs_g} passes, last loss {loss}")
        return loss

    def refresh(self, epoch: int) -> Tuple[PseudoSample, ...]:
        return assign_pseudo_labels(self.target, self.params.target, self.pool_mols, self.pool, epoch,
                                    self.semi.k, self.task, workers=self.workers)

    def _score(self, molecules, y):
        return score_confidences(self.instructor, self.params.instructor, self.target, self.params.target,
                                 molecules, y, self.training.loss, self.task, workers=self.workers)

    # =========================================================================
    # EPOCH LOOPS
    # =========================================================================

    def run(self) -> TrainResult:
        """Warm-up followed by `training.epochs` epochs of the configured strategy"""
        logging.info(f"[SEMIMOL] Starting {self.strategy} run (seed {self.experiment.seed})")
        self.warmup_target()
        if self.strategy in SEMIMOL_FAMILY:
            self.warmup_instructor()
        elif self.strategy == 'pi_model' and self.experiment.model.dropout == 0.0:
            logging.warning("[BASELINE] pi_model with dropout 0: the consistency term is identically zero")

        best_score = self.val_metric()
        best_epoch = -1
        best_f = snapshot(self.params.target)
        best_g = snapshot(self.params.instructor)
        state = CurriculumState(self.semi.gamma, self.semi.delta_gamma, self.semi.k, None, 0, self.semi.gamma_min)
        cutoff = NAN

        epochs = self.training.epochs
        for epoch in tqdm(range(epochs), desc=self.strategy, disable=not config.SHOW_PROGRESS):
            started = time.perf_counter()

            if self.strategy in SEMIMOL_FAMILY:
                gamma, size, loss_f, loss_g = self._semimol_epoch(epoch, state)
                cutoff = gamma
            elif self.strategy == 'pi_model':
                gamma, size, loss_g = NAN, len(self.train_mols) + len(self.pool_mols), NAN
                loss_f = self._sweep_pi(epoch)
            else:
                gamma, size, loss_g = NAN, len(self.train_mols), NAN
                mask = np.zeros(len(self.train_mols), dtype=bool)
                loss_f = self._sweep_f(self.train_mols, self.train_y, mask, self.semi.loss_weight, epoch)

            val = self.val_metric()
            test = self.test_metric()
            if self.strategy == 'semimol':
                state = curriculum_step(state, val, self.lower_is_better)

            if self._improves(val, best_score):
                best_score, best_epoch = val, epoch
                best_f = snapshot(self.params.target)
                best_g = snapshot(self.params.instructor)

            record = EpochRecord(
                epoch=epoch, gamma=gamma, hybrid_size=size, loss_f=loss_f, loss_g=loss_g,
                val_metric=val, test_metric=test,
                wall_ms=round((time.perf_counter() - started) * 1000.0, 3) if self.experiment.output.log_wall_time else None,
                f_digest=params_digest(self.params.target),
            )
            self.log.append(record)
            if self.artifacts is not None:
                self.artifacts.append_log_row(record.as_row())
            logging.info(f"[SEMIMOL] epoch {epoch}: gamma={gamma:.4f}, |D''|={size}, loss_f={loss_f:.6f}, "
                         f"loss_g={loss_g:.6f}, val={val:.6f}")

        restore(self.params.target, best_f)
        restore(self.params.instructor, best_g)
        logging.info(f"[SEMIMOL] Restored best checkpoint from epoch {best_epoch} (val {best_score:.6f})")

        if self.strategy == 'semimol':
            gamma_final = state.gamma
        elif self.strategy == 'fixed_threshold':
            gamma_final = self.semi.gamma
        elif self.strategy == 'percentile':
            gamma_final = cutoff if math.isfinite(cutoff) else None
        else:
            gamma_final = None

        return TrainResult(
            strategy=self.strategy,
            target_params=self.params.target,
            instructor_params=self.params.instructor if self.strategy in SEMIMOL_FAMILY else None,
            log=self.log,
            metrics=self.final_metrics(gamma_final, best_epoch),
            gamma_final=gamma_final,
            best_epoch=best_epoch,
            pseudo_pool=self.pool,
        )

    def _improves(self, score: float, best: float) -> bool:
        if not math.isfinite(score):
            return False
        if not math.isfinite(best):
            return True
        return score < best if self.lower_is_better else score > best

    def _semimol_epoch(self, epoch: int, state: CurriculumState):
        """refresh -> score D' -> g sweep -> build D'' -> f sweep; returns (gamma used, |D''|, L_f, L_g)"""
        self.pool = self.refresh(epoch)

        molecules, y, c = self._d_prime(self.pool)
        p, hf, stats = self._score(molecules, y)
        n_labeled = len(self.train_mols)
        self.pool = with_confidences(self.pool, p[n_labeled:])
        loss_g = self._sweep_g(molecules, y, hf, c, stats, epoch)

        if self.strategy == 'percentile':
            q = percentile_fraction(epoch, self.training.epochs, self.semi.percentile_start, self.semi.percentile_end)
            hybrid, gamma = admit_top_fraction(self.data.train, self.pool, q)
        else:
            gamma = state.gamma
            hybrid = build_hybrid_set(self.data.train, self.pool, gamma)
        assert hybrid.num_labeled == n_labeled

        admitted = [s.index for s in hybrid.pseudo]
        mols = self.train_mols + [self.pool_mols[i] for i in admitted]
        targets = np.concatenate([self.train_y, np.array([s.y_hat for s in hybrid.pseudo], dtype=np.float64)])
        loss_f = self._sweep_f(mols, targets, hybrid.pseudo_mask(), self.semi.loss_weight, epoch)

        if epoch in self.experiment.output.dump_epochs and self.artifacts is not None:
            self._dump(epoch, set(admitted), gamma)
        return gamma, hybrid.size, loss_f, loss_g

    def _dump(self, epoch: int, admitted: set, gamma: float):
        rows = []
        for s in self.pool:
            y_hat = s.y_hat if self.task == 'classification' else float(self._destandardize(s.y_hat))
            rows.append({
                'sample_id': s.index,
                'smiles': self.pool_mols[s.index].smiles,
                'y_hat': y_hat,
                'p': s.p,
                'admitted': s.index in admitted,
                'gamma': gamma,
                'epoch_assigned': s.epoch_assigned,
            })
        self.artifacts.save_pseudo_dump(epoch, rows)

    # =========================================================================
    # RESULTS
    # =========================================================================

    def final_metrics(self, gamma_final: Optional[float], best_epoch: int) -> Dict:
        val_flags = [r.cliff_flag for r in self.data.val]
        test_flags = [r.cliff_flag for r in self.data.test]
        val_block = evaluate(self.predict(self.val_mols), self.val_y, val_flags, self.task)
        test_block = evaluate(self.predict(self.test_mols) if self.test_mols else [], self.test_y,
                              test_flags, self.task)

        metrics = {k: v for k, v in test_block.items() if k not in ('n', 'n_cliff')}
        metrics.update({
            'val': val_block,
            'test': test_block,
            'gamma_final': gamma_final,
            'best_epoch': best_epoch,
            'epochs': len(self.log),
            'strategy': self.strategy,
            'seed': self.experiment.seed,
            'task': self.task,
            'metric': self.experiment.metric,
            'name': self.experiment.name,
            'counts': self.data.counts(),
            'label_mean': self.y_mean,
            'label_std': self.y_std,
        })
        return metrics

    def save_checkpoints(self):
        if self.artifacts is None:
            return
        save_checkpoint(self.artifacts.checkpoint_path('target'), self.spec, self.params.target, 'target')
        if self.strategy in SEMIMOL_FAMILY:
            save_checkpoint(self.artifacts.checkpoint_path('instructor'), self.spec, self.params.instructor,
                            'instructor')


# =============================================================================
# ENTRY POINTS
# =============================================================================

def _train(experiment, data: TrainingData, streams: Optional[RngStreams],
           artifacts: Optional[RunArtifacts]) -> TrainResult:
    trainer = SemiMolTrainer(experiment, data, streams, artifacts)
    result = trainer.run()
    if artifacts is not None:
        if experiment.output.save_checkpoints:
            trainer.save_checkpoints()
        artifacts.save_metrics(result.metrics)
    return result


def train_semimol(experiment, data: TrainingData, streams: Optional[RngStreams] = None,
                  artifacts: Optional[RunArtifacts] = None) -> TrainResult:
    """Warm-up, then the self-adaptive pseudo-labelling loop"""
    if experiment.strategy != 'semimol':
        raise ValueError(f"train_semimol needs strategy 'semimol', got: {experiment.strategy}")
    return _train(experiment, data, streams, artifacts)


def train_baseline(strategy: str, experiment, data: TrainingData, streams: Optional[RngStreams] = None,
                   artifacts: Optional[RunArtifacts] = None) -> TrainResult:
    """supervised | pi_model | fixed_threshold | percentile"""
    if strategy not in BASELINES:
        raise ValueError(f"unknown baseline '{strategy}', expected one of {BASELINES}")
    if experiment.strategy != strategy:
        experiment = _with_strategy(experiment, strategy)
    logging.info(f"[BASELINE] Training {strategy}")
    return _train(experiment, data, streams, artifacts)


def train(experiment, data: TrainingData, streams: Optional[RngStreams] = None,
          artifacts: Optional[RunArtifacts] = None) -> TrainResult:
    """Dispatch on experiment.strategy"""
    if experiment.strategy == 'semimol':
        return train_semimol(experiment, data, streams, artifacts)
    return train_baseline(experiment.strategy, experiment, data, streams, artifacts)


def _with_strategy(experiment, strategy: str):
    return replace(experiment, strategy=strategy)
