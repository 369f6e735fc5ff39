"""Train / validation / test partitioning"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.core.errors import RatioError
from src.datasets.records import LabeledRecord

Split = Tuple[List[LabeledRecord], List[LabeledRecord], List[LabeledRecord]]

MAX_QUANTILE_BINS = 10


def _check_ratios(ratios: Sequence[float]):
    if len(ratios) != 3:
        raise RatioError(f"expected 3 ratios (train, val, test), got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise RatioError(f"ratios must be non-negative, got {list(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioError(f"ratios must sum to 1, got {sum(ratios)}")


def _strata(records: Sequence[LabeledRecord], task: str) -> np.ndarray:
    y = np.array([r.y for r in records], dtype=np.float64)
    if task == 'classification':
        return y.astype(np.int64)
    bins = max(1, min(MAX_QUANTILE_BINS, len(records) // 10))
    # rank-based bins so ties fall in one bin regardless of input order
    order = np.argsort(y, kind='stable')
    ranks = np.empty(len(y), dtype=np.int64)
    ranks[order] = np.arange(len(y))
    return (ranks * bins) // max(len(y), 1)


def split(records: Sequence[LabeledRecord], ratios: Sequence[float], rng: np.random.Generator,
          task: str = 'regression') -> Split:
    """
    Partition records into (train, val, test).

    When every record carries a split tag the tags are used verbatim.
    Otherwise records are stratified (label quantile bins for regression,
    class for classification), shuffled inside each stratum and interleaved
    by their fractional position, so every prefix of the combined order is
    close to the overall label distribution. Sizes are round(ratio * n) for
    train and val; test takes the remainder.
    """
    _check_ratios(ratios)
    records = list(records)

    if records and all(r.split_tag is not None for r in records):
        parts = tuple([r for r in records if r.split_tag == tag] for tag in ('train', 'val', 'test'))
        logging.info(f"[SPLIT] Using provided split tags: {tuple(len(p) for p in parts)}")
        return parts
    if any(r.split_tag is not None for r in records):
        logging.warning("[SPLIT] Only some records carry split tags; ignoring tags and splitting by ratio")

    n = len(records)
    strata = _strata(records, task)
    keys = []
    for stratum in np.unique(strata):
        members = np.flatnonzero(strata == stratum)
        members = members[rng.permutation(len(members))]
        for pos, idx in enumerate(members):
            keys.append(((pos + 0.5) / len(members), int(stratum), int(idx)))
    keys.sort()
    order = [idx for _, _, idx in keys]

    n_train = min(n, int(np.floor(ratios[0] * n + 0.5)))
    n_val = min(n - n_train, int(np.floor(ratios[1] * n + 0.5)))
    train = [records[i] for i in order[:n_train]]
    val = [records[i] for i in order[n_train:n_train + n_val]]
    test = [records[i] for i in order[n_train + n_val:]]
    logging.info(f"[SPLIT] Stratified split of {n} records: train={len(train)} val={len(val)} test={len(test)}")
    return train, val, test
