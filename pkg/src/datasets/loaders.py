"""
File ingestion.

Labeled data: CSV with a header; smiles and label columns required, split
column optional. Unlabeled data: one SMILES per line, lines starting with '#' are comments,
an optional second whitespace-separated field (a name) is ignored.

Unparseable SMILES and non-finite labels are dropped, counted and logged.
"""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from src.chemgraph.smiles import parse_smiles
from src.core.errors import DataIoError, MissingColumn, ParseError
from src.datasets.records import CliffPair, LabeledRecord, SPLIT_TAGS, UnlabeledRecord


def load_labeled_csv(path, smiles_column: str = 'smiles', label_column: str = 'label',
                     split_column: str = 'split') -> Tuple[List[LabeledRecord], int]:
    """Return (records, dropped count); duplicate rows are kept as-is"""
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise DataIoError(f"labeled file not found: {path}")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataIoError(f"cannot read labeled file {path}: {e}")

    for column in (smiles_column, label_column):
        if column not in df.columns:
            raise MissingColumn(f"{path} has no '{column}' column (found: {list(df.columns)})")
    has_split = split_column in df.columns

    labels = pd.to_numeric(df[label_column].str.strip(), errors='coerce').astype(np.float64)

    records: List[LabeledRecord] = []
    dropped = 0
    for row, smiles in enumerate(df[smiles_column]):
        smiles = smiles.strip()
        y = labels.iloc[row]
        if not np.isfinite(y):
            logging.warning(f"[DATA] Dropping row {row + 1} of {path.name}: label '{df[label_column].iloc[row]}' is not a finite number")
            dropped += 1
            continue
        try:
            graph = parse_smiles(smiles)
        except ParseError as e:
            logging.warning(f"[DATA] Dropping row {row + 1} of {path.name}: {e}")
            dropped += 1
            continue

        tag = None
        if has_split:
            raw = df[split_column].iloc[row].strip().lower()
            if raw in SPLIT_TAGS:
                tag = raw
            elif raw:
                logging.warning(f"[DATA] Row {row + 1} of {path.name}: unknown split tag '{raw}' ignored")
        records.append(LabeledRecord(smiles, float(y), tag, graph=graph))

    logging.info(f"[DATA] Loaded {len(records)} labeled records from {path} ({dropped} dropped)")
    return records, dropped


def load_unlabeled(path) -> Tuple[List[UnlabeledRecord], int]:
    """Return (records, dropped count) from a one-SMILES-per-line file"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except FileNotFoundError:
        raise DataIoError(f"unlabeled file not found: {path}")
    except (OSError, UnicodeDecodeError) as e:
        raise DataIoError(f"cannot read unlabeled file {path}: {e}")

    records: List[UnlabeledRecord] = []
    dropped = 0
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        # '#' is also the triple-bond symbol, so only whole-line comments count
        if not text or text.startswith('#'):
            continue
        smiles = text.split()[0]
        try:
            records.append(UnlabeledRecord(smiles, parse_smiles(smiles)))
        except ParseError as e:
            logging.warning(f"[DATA] Dropping line {lineno} of {path.name}: {e}")
            dropped += 1

    logging.info(f"[DATA] Loaded {len(records)} unlabeled molecules from {path} ({dropped} dropped)")
    return records, dropped


def cliff_pairs_frame(pairs: List[CliffPair], records: List[LabeledRecord] = None) -> pd.DataFrame:
    """Pair report table: i, j, similarity, delta_potency (+ SMILES when records given)"""
    df = pd.DataFrame(
        [(p.i, p.j, p.similarity, p.delta_potency) for p in pairs],
        columns=['i', 'j', 'similarity', 'delta_potency'],
    )
    if records is not None:
        df['smiles_i'] = [records[p.i].smiles for p in pairs]
        df['smiles_j'] = [records[p.j].smiles for p in pairs]
    return df


def write_cliff_report(path, pairs: List[CliffPair], records: List[LabeledRecord] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cliff_pairs_frame(pairs, records).to_csv(path, index=False, float_format='%.6f')
    return path
