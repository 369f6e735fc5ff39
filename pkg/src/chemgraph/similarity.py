"""SMILES string similarity"""

import numpy as np

from src.chemgraph.smiles import parse_smiles


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs"""
    if not a:
        return len(b)
    if not b:
        return len(a)
    codes_b = np.frombuffer(b.encode('ascii'), dtype=np.uint8)
    previous = np.arange(len(b) + 1, dtype=np.int64)
    for i, char in enumerate(a.encode('ascii'), start=1):
        substitute = previous[:-1] + (codes_b != char)
        delete = previous[1:] + 1
        row = np.empty_like(previous)
        row[0] = i
        row[1:] = np.minimum(substitute, delete)
        # insertions chain left to right
        for j in range(1, len(row)):
            if row[j - 1] + 1 < row[j]:
                row[j] = row[j - 1] + 1
        previous = row
    return int(previous[-1])


def smiles_similarity(a: str, b: str) -> float:
    """1 - Levenshtein(a, b) / max(len(a), len(b)); both must parse"""
    parse_smiles(a)
    parse_smiles(b)
    return string_similarity(a, b)


def string_similarity(a: str, b: str) -> float:
    """String part of smiles_similarity, for callers that already parsed"""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
