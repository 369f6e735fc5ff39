"""
Data ingestion, splitting, activity-cliff detection and evaluation metrics.
"""

from .records import LabeledRecord, UnlabeledRecord, CliffPair, SPLIT_TAGS
from .loaders import load_labeled_csv, load_unlabeled, cliff_pairs_frame, write_cliff_report
from .splits import split
from .cliffs import detect_cliffs
from .metrics import rmse, mae, cliff_rmse, cliff_mae, roc_auc, cliff_roc_auc, evaluate
from .prepare import TrainingData, build_training_data, load_training_data, cap_pool

__all__ = [
    'LabeledRecord', 'UnlabeledRecord', 'CliffPair', 'SPLIT_TAGS',
    'load_labeled_csv', 'load_unlabeled', 'cliff_pairs_frame', 'write_cliff_report',
    'split', 'detect_cliffs',
    'rmse', 'mae', 'cliff_rmse', 'cliff_mae', 'roc_auc', 'cliff_roc_auc', 'evaluate',
    'TrainingData', 'build_training_data', 'load_training_data', 'cap_pool',
]
