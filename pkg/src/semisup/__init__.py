"""
Semi-supervised training: pseudo-labelling with an instructor model,
curriculum threshold control and the comparison strategies.
"""

from .types import PseudoSample, HybridSet, CurriculumState, EpochRecord, TrainResult
from .curriculum import curriculum_step, percentile_fraction
from .hybrid import build_hybrid_set, build_full_set, admit_top_fraction, class_weights
from .objectives import target_loss, instructor_loss, consistency_loss
from .inference import assign_pseudo_labels, score_confidences, predict_target, with_confidences
from .engine import SemiMolTrainer, train, train_semimol, train_baseline, SEMIMOL_FAMILY, BASELINES

__all__ = [
    'PseudoSample', 'HybridSet', 'CurriculumState', 'EpochRecord', 'TrainResult',
    'curriculum_step', 'percentile_fraction',
    'build_hybrid_set', 'build_full_set', 'admit_top_fraction', 'class_weights',
    'target_loss', 'instructor_loss', 'consistency_loss',
    'assign_pseudo_labels', 'score_confidences', 'predict_target', 'with_confidences',
    'SemiMolTrainer', 'train', 'train_semimol', 'train_baseline', 'SEMIMOL_FAMILY', 'BASELINES',
]
