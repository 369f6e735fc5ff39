"""
Activity-cliff detection.

A pair (i, j) is a cliff when its structural similarity, the larger of
fingerprint Tanimoto and SMILES string similarity, reaches sim_threshold and
|y_i - y_j| reaches potency_threshold. Pair rows can be sharded over worker
threads; results are merged in (i, j) order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from src.chemgraph.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH, Fingerprint, morgan_fingerprint, tanimoto_matrix
from src.chemgraph.similarity import string_similarity
from src.chemgraph.smiles import parse_smiles
from src.core.errors import ConfigError
from src.datasets.records import CliffPair, LabeledRecord


def _fingerprint_matrix(records: Sequence[LabeledRecord], fingerprints, radius: int, width: int) -> np.ndarray:
    if fingerprints is None:
        rows = []
        for r in records:
            graph = r.graph if r.graph is not None else parse_smiles(r.smiles)
            rows.append(morgan_fingerprint(graph, radius, width).bits)
        return np.array(rows, dtype=np.float64).reshape(len(records), -1)
    if isinstance(fingerprints, np.ndarray):
        return np.asarray(fingerprints, dtype=np.float64)
    return np.array([fp.bits if isinstance(fp, Fingerprint) else fp for fp in fingerprints], dtype=np.float64)


def _rows(start: int, stop: int, smiles: List[str], y: np.ndarray, tan: np.ndarray,
          sim_threshold: float, potency_threshold: float) -> List[CliffPair]:
    pairs = []
    n = len(smiles)
    for i in range(start, stop):
        for j in range(i + 1, n):
            delta = abs(y[i] - y[j])
            if delta < potency_threshold:
                continue
            sim = tan[i, j]
            if sim < sim_threshold:
                sim = max(sim, string_similarity(smiles[i], smiles[j]))
            if sim >= sim_threshold:
                pairs.append(CliffPair(i, j, float(sim), float(delta)))
    return pairs


def detect_cliffs(records: Sequence[LabeledRecord], sim_threshold: float = 0.9,
                  potency_threshold: float = 1.0, fingerprints: Optional[object] = None,
                  radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH,
                  workers: int = 1) -> List[CliffPair]:
    """All cliff pairs (sorted by i, j); sets cliff_flag on every pair member and clears it elsewhere"""
    if not 0.0 < sim_threshold <= 1.0:
        raise ConfigError(f"cliffs.sim_threshold must be in (0, 1], got: {sim_threshold}")
    if not potency_threshold > 0.0:
        raise ConfigError(f"cliffs.potency_threshold must be > 0, got: {potency_threshold}")

    n = len(records)
    smiles = [r.smiles for r in records]
    y = np.array([r.y for r in records], dtype=np.float64)
    tan = tanimoto_matrix(_fingerprint_matrix(records, fingerprints, radius, width)) if n else np.zeros((0, 0))

    if workers > 1 and n > 1:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_rows, int(a), int(b), smiles, y, tan, sim_threshold, potency_threshold)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a
            ]
            pairs = [p for f in futures for p in f.result()]
    else:
        pairs = _rows(0, n, smiles, y, tan, sim_threshold, potency_threshold)

    flagged = set()
    for p in pairs:
        flagged.update((p.i, p.j))
    for k, r in enumerate(records):
        r.cliff_flag = k in flagged

    logging.info(f"[CLIFFS] {len(pairs)} cliff pairs over {n} molecules "
                 f"(sim >= {sim_threshold}, |dy| >= {potency_threshold}); {len(flagged)} flagged")
    return pairs
