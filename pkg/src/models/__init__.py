"""
Models: the target network f (GIN or fingerprint MLP), the instructor g,
batching, parameter initialisation and checkpoints.
"""

from .spec import ModelSpec
from .batching import EncodedMolecule, GraphBatch, collate, encode_graph, encode_smiles, iter_batches
from .target import TargetModel, target_forward
from .instructor import InstructorModel, FusionStats, instructor_forward, HF_CLAMP
from .params import ModelParams, init_params, params_digest, snapshot, restore
from .checkpoint import save_checkpoint, load_checkpoint, read_checkpoint

__all__ = [
    'ModelSpec',
    'EncodedMolecule', 'GraphBatch', 'collate', 'encode_graph', 'encode_smiles', 'iter_batches',
    'TargetModel', 'target_forward',
    'InstructorModel', 'FusionStats', 'instructor_forward', 'HF_CLAMP',
    'ModelParams', 'init_params', 'params_digest', 'snapshot', 'restore',
    'save_checkpoint', 'load_checkpoint', 'read_checkpoint',
]
