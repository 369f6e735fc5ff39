"""
Read-only model passes over molecule lists: target predictions, pseudo-label
refresh and instructor confidences.

Batches can be fanned out over a thread pool; results are always returned in
input order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.batching import EncodedMolecule, GraphBatch, collate
from src.models.instructor import FusionStats, InstructorModel, instructor_forward
from src.models.target import TargetModel
from src.ndcore.losses import per_sample_loss
from src.semisup.types import PseudoSample

EVAL_BATCH_SIZE = 256


def batched_map(fn: Callable[[GraphBatch, np.ndarray], np.ndarray], molecules: Sequence[EncodedMolecule],
                batch_size: int = EVAL_BATCH_SIZE, workers: int = 1) -> np.ndarray:
    """Apply fn(batch, indices) to consecutive chunks and concatenate the results"""
    n = len(molecules)
    if n == 0:
        return np.zeros(0)
    chunks = [np.arange(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]

    def run(chunk):
        return fn(collate([molecules[i] for i in chunk]), chunk)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts: List[np.ndarray] = list(executor.map(run, chunks))
    else:
        parts = [run(chunk) for chunk in chunks]
    return np.concatenate(parts)


def predict_target(model: TargetModel, params, molecules: Sequence[EncodedMolecule],
                   batch_size: int = EVAL_BATCH_SIZE, workers: int = 1) -> np.ndarray:
    """Eval-mode f outputs (standardised units or logits)"""
    return batched_map(lambda batch, _: model.predict(params, batch), molecules, batch_size, workers)


def assign_pseudo_labels(model: TargetModel, params, pool_molecules: Sequence[EncodedMolecule],
                         prior: Sequence[PseudoSample], epoch: int, k: int, task: str = 'regression',
                         batch_size: int = EVAL_BATCH_SIZE, workers: int = 1) -> Tuple[PseudoSample, ...]:
    """
    Refresh y_hat for every pool molecule when epoch is a multiple of k;
    otherwise return the prior pool unchanged. Classification pseudo-labels
    are hard classes. Confidences carried over from the prior pool.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got: {k}")
    prior = tuple(prior)
    if epoch % k != 0:
        return prior

    pred = predict_target(model, params, pool_molecules, batch_size, workers)
    if task == 'classification':
        pred = (pred > 0.0).astype(np.float64)

    previous_p = {s.index: s.p for s in prior}
    pool = tuple(
        PseudoSample(i, float(pred[i]), previous_p.get(i, 0.5), 0, epoch)
        for i in range(len(pool_molecules))
    )
    logging.debug(f"[SEMIMOL] Pseudo-labels refreshed for {len(pool)} molecules at epoch {epoch}")
    return pool


def score_confidences(instructor: InstructorModel, g_params, target: TargetModel, f_params,
                      molecules: Sequence[EncodedMolecule], y: np.ndarray, loss_kind: str,
                      task: str = 'regression', stats: Optional[FusionStats] = None,
                      batch_size: int = EVAL_BATCH_SIZE,
                      workers: int = 1) -> Tuple[np.ndarray, np.ndarray, FusionStats]:
    """
    Confidence p for every sample of D' with f and g in eval mode.

    Returns (p, per-sample target loss, fusion statistics). Statistics are
    computed from D' itself unless given.
    """
    y = np.asarray(y, dtype=np.float64)
    pred = predict_target(target, f_params, molecules, batch_size, workers)
    hf = per_sample_loss(loss_kind, task, pred, y)
    stats = stats or FusionStats.from_arrays(y, hf)

    def score(batch, chunk):
        return instructor_forward(instructor, g_params, batch, y[chunk], hf[chunk], stats)

    p = batched_map(score, molecules, batch_size, workers)
    return p, hf, stats


def with_confidences(pool: Sequence[PseudoSample], p: np.ndarray) -> Tuple[PseudoSample, ...]:
    """Copy of the pool carrying new confidences (p aligned with pool order)"""
    return tuple(replace(s, p=float(v)) for s, v in zip(pool, p))
