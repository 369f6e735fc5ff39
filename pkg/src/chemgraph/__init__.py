"""
Chemistry frontend: SMILES parsing, molecular graphs, featurization,
circular fingerprints and similarity measures.
"""

from .graph import Atom, Bond, BondOrder, MolecularGraph, SUPPORTED_ELEMENTS
from .smiles import parse_smiles, tokenize, TokenType, MAX_SMILES_LENGTH
from .features import FeatureMatrices, featurize, D_NODE, D_EDGE
from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto, tanimoto_matrix, environment_ids
from .similarity import smiles_similarity, string_similarity, levenshtein

__all__ = [
    'Atom', 'Bond', 'BondOrder', 'MolecularGraph', 'SUPPORTED_ELEMENTS',
    'parse_smiles', 'tokenize', 'TokenType', 'MAX_SMILES_LENGTH',
    'FeatureMatrices', 'featurize', 'D_NODE', 'D_EDGE',
    'Fingerprint', 'morgan_fingerprint', 'tanimoto', 'tanimoto_matrix', 'environment_ids',
    'smiles_similarity', 'string_similarity', 'levenshtein',
]
