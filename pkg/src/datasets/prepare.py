"""
Training data assembly: load, split, cap the unlabeled pool and flag
activity cliffs, all driven by one ExperimentConfig.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.core.errors import EmptyDataset
from src.datasets.cliffs import detect_cliffs
from src.datasets.loaders import load_labeled_csv, load_unlabeled
from src.datasets.records import CliffPair, LabeledRecord, UnlabeledRecord
from src.datasets.splits import split
from src.ndcore.random import RngStreams


@dataclass
class TrainingData:
    """Labeled splits, the (capped) unlabeled pool and cliff pairs over all labeled records"""
    train: List[LabeledRecord]
    val: List[LabeledRecord]
    test: List[LabeledRecord]
    pool: List[UnlabeledRecord] = field(default_factory=list)
    cliff_pairs: List[CliffPair] = field(default_factory=list)
    dropped_labeled: int = 0
    dropped_unlabeled: int = 0

    @property
    def labeled(self) -> List[LabeledRecord]:
        return self.train + self.val + self.test

    def counts(self) -> dict:
        return {
            'train': len(self.train),
            'val': len(self.val),
            'test': len(self.test),
            'pool': len(self.pool),
            'cliff_pairs': len(self.cliff_pairs),
            'dropped_labeled': self.dropped_labeled,
            'dropped_unlabeled': self.dropped_unlabeled,
        }


def cap_pool(pool: List[UnlabeledRecord], cap: int, rng: np.random.Generator) -> List[UnlabeledRecord]:
    """Uniform subsample of at most `cap` records, original order kept"""
    if len(pool) <= cap:
        return list(pool)
    keep = np.sort(rng.choice(len(pool), size=cap, replace=False))
    logging.info(f"[DATA] Capping unlabeled pool: {len(pool)} -> {cap}")
    return [pool[i] for i in keep]


def build_training_data(records: List[LabeledRecord], pool: List[UnlabeledRecord], experiment,
                        streams: RngStreams) -> TrainingData:
    """Split, cap and flag in-memory records"""
    data_cfg = experiment.data
    if not records:
        raise EmptyDataset("no labeled records")

    train, val, test = split(records, data_cfg.split_ratios, streams.get('split'), experiment.task)
    pool = cap_pool(pool, data_cfg.pool_cap, streams.get('pool'))

    labeled = train + val + test
    pairs = detect_cliffs(
        labeled,
        experiment.cliffs.sim_threshold,
        experiment.cliffs.potency_threshold,
        radius=experiment.model.fingerprint_radius,
        width=experiment.model.fingerprint_width,
        workers=experiment.training.workers,
    )
    data = TrainingData(train, val, test, pool, pairs)
    logging.info(f"[DATA] Prepared: {data.counts()}")
    return data


def load_training_data(experiment, streams: RngStreams) -> TrainingData:
    """Read the configured files and build TrainingData"""
    data_cfg = experiment.data
    records, dropped = load_labeled_csv(
        data_cfg.labeled_path, data_cfg.smiles_column, data_cfg.label_column, data_cfg.split_column,
    )
    pool: List[UnlabeledRecord] = []
    dropped_pool = 0
    if data_cfg.unlabeled_path:
        pool, dropped_pool = load_unlabeled(data_cfg.unlabeled_path)

    data = build_training_data(records, pool, experiment, streams)
    data.dropped_labeled = dropped
    data.dropped_unlabeled = dropped_pool
    return data
