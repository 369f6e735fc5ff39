"""Hybrid-set construction and instructor class weights"""

import math
from typing import Sequence, Tuple

import numpy as np

from src.semisup.types import HybridSet, PseudoSample


def build_hybrid_set(d_labeled: Sequence, pseudo_pool: Sequence[PseudoSample], gamma: float) -> HybridSet:
    """D'' = labeled members plus pseudo samples with p >= gamma (pool order kept)"""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got: {gamma}")
    admitted = tuple(s for s in pseudo_pool if s.p >= gamma)
    return HybridSet(tuple(d_labeled), admitted)


def build_full_set(d_labeled: Sequence, pseudo_pool: Sequence[PseudoSample]) -> HybridSet:
    """D' = labeled members plus every pseudo sample"""
    return HybridSet(tuple(d_labeled), tuple(pseudo_pool))


def admit_top_fraction(d_labeled: Sequence, pseudo_pool: Sequence[PseudoSample],
                       fraction: float) -> Tuple[HybridSet, float]:
    """
    Admit the ceil(fraction * M) most confident pseudo samples (ties by pool
    index). Returns the set and the confidence of the last admitted sample
    (NaN when nothing is admitted).
    """
    count = min(len(pseudo_pool), int(math.ceil(fraction * len(pseudo_pool) - 1e-12)))
    ranked = sorted(pseudo_pool, key=lambda s: (-s.p, s.index))[:count]
    cutoff = ranked[-1].p if ranked else float('nan')
    admitted = tuple(sorted(ranked, key=lambda s: s.index))
    return HybridSet(tuple(d_labeled), admitted), cutoff


def class_weights(c: np.ndarray) -> np.ndarray:
    """
    Per-sample BCE weights giving the observed (c=1) and pseudo (c=0) classes
    equal total weight, normalised to mean 1. With one class present every
    weight is 1.
    """
    c = np.asarray(c, dtype=np.float64)
    n_obs = int((c == 1).sum())
    n_pseudo = int((c == 0).sum())
    total = n_obs + n_pseudo
    if n_obs == 0 or n_pseudo == 0:
        return np.ones_like(c)
    w = np.where(c == 1, total / (2.0 * n_obs), total / (2.0 * n_pseudo))
    return w / w.mean()
