"""
Synthetic molecules and tasks.

Molecules are assembled from a small fragment vocabulary joined head to tail,
which keeps every generated SMILES valid for the parser. The motif task
labels a molecule with the number of benzene rings it contains plus Gaussian
noise.
"""

import logging
from typing import List, Tuple

import numpy as np

from src.datasets.records import LabeledRecord, UnlabeledRecord

MOTIF = 'c1ccccc1'

# (fragment, relative weight)
FRAGMENTS: Tuple[Tuple[str, float], ...] = (
    ('C', 3.0),
    ('CC', 2.0),
    ('C(=O)', 1.5),
    ('N', 1.0),
    ('O', 1.0),
    ('S', 0.5),
    ('C(F)', 0.7),
    ('C(Cl)', 0.5),
    (MOTIF, 1.5),
    ('C1CCCCC1', 1.0),
    ('c1ccncc1', 1.0),
)

# well-known drug-like molecules, used as the head of the desk corpus
DRUG_LIKE = (
    'CC(=O)Oc1ccccc1C(=O)O',                 # aspirin
    'Cn1cnc2c1c(=O)n(C)c(=O)n2C',            # caffeine
    'CC(C)Cc1ccc(cc1)C(C)C(=O)O',            # ibuprofen
    'CC(=O)Nc1ccc(O)cc1',                    # paracetamol
    'CN1CCCC1c1cccnc1',                      # nicotine
    'c1ccc2[nH]ccc2c1',                      # indole
    'CCN(CC)CC(=O)Nc1c(C)cccc1C',            # lidocaine
    'CN(C)C(=N)NC(=N)N',                     # metformin
    'CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21',   # diazepam
    'CNCCC(Oc1ccc(cc1)C(F)(F)F)c1ccccc1',    # fluoxetine
    'Nc1ccc(cc1)S(N)(=O)=O',                 # sulfanilamide
    'OC(=O)c1ccccc1O',                       # salicylic acid
    '[O-][N+](=O)c1ccccc1',                  # nitrobenzene
    'c1ccc2ccccc2c1',                        # naphthalene
    'c1ccsc1',                               # thiophene
    'c1ccoc1',                               # furan
    'c1ccncc1',                              # pyridine
    'Nc1ccccc1',                             # aniline
    'O=Cc1ccccc1',                           # benzaldehyde
    'NCC(=O)O',                              # glycine
    'NC(=O)N',                               # urea
    'CC(C)=O',                               # acetone
    'CCOCC',                                 # diethyl ether
    'ClC(Cl)Cl',                             # chloroform
    'C1CCCCC1',                              # cyclohexane
    'CCO',                                   # ethanol
    'CC(=O)O',                               # acetic acid
    'Cc1ccccc1',                             # toluene
    'OC(=O)c1ccccc1',                        # benzoic acid
    'CC(N)C(=O)O',                           # alanine
)


def random_molecule(rng: np.random.Generator, min_fragments: int = 2,
                    max_fragments: int = 6) -> Tuple[str, int]:
    """One assembled molecule and its motif count"""
    names = [f for f, _ in FRAGMENTS]
    weights = np.array([w for _, w in FRAGMENTS])
    weights = weights / weights.sum()

    size = int(rng.integers(min_fragments, max_fragments + 1))
    picks = rng.choice(len(names), size=size, p=weights)
    parts = [names[i] for i in picks]
    if parts[0] in ('O', 'S', 'N'):
        parts.insert(0, 'C')
    return ''.join(parts), sum(1 for p in parts if p == MOTIF)


def motif_task(n: int, seed: int = 0, noise: float = 0.2) -> List[LabeledRecord]:
    """Regression records: y = motif count + N(0, noise^2)"""
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(n):
        smiles, count = random_molecule(rng)
        records.append(LabeledRecord(smiles, float(count + rng.normal(0.0, noise))))
    return records


def motif_pool(n: int, seed: int = 1) -> List[UnlabeledRecord]:
    rng = np.random.default_rng(seed)
    return [UnlabeledRecord(random_molecule(rng)[0]) for _ in range(n)]


def desk_corpus(n: int = 1000, seed: int = 0) -> List[str]:
    """Drug-like molecules followed by assembled ones, n SMILES in total"""
    rng = np.random.default_rng(seed)
    corpus = list(DRUG_LIKE[:n])
    while len(corpus) < n:
        corpus.append(random_molecule(rng, 1, 8)[0])
    return corpus


def instructor_separability_set(seed: int = 0, n_observed: int = 200, n_pseudo: int = 2000,
                                noise: float = 1.0):
    """
    Observed samples carry exact unit-scale targets, pseudo samples the same
    targets plus N(0, noise^2). Returns (smiles, y, clean_y, c).
    """
    rng = np.random.default_rng(seed)
    total = n_observed + n_pseudo
    smiles, counts = [], []
    for _ in range(total):
        s, count = random_molecule(rng)
        smiles.append(s)
        counts.append(count)

    counts = np.array(counts, dtype=np.float64)
    std = counts.std() if counts.std() > 0 else 1.0
    clean = (counts - counts.mean()) / std
    c = np.concatenate([np.ones(n_observed), np.zeros(n_pseudo)])
    y = clean + np.where(c == 0, rng.normal(0.0, noise, size=total), 0.0)
    logging.debug(f"[DATA] Separability set: {n_observed} observed, {n_pseudo} pseudo, noise {noise}")
    return smiles, y, clean, c
