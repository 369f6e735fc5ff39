"""
SMILES parsing.

Supported subset: organic-subset and bracket atoms (H count, charge, atom
class), explicit bonds - = # :, branches, ring closures (single digit and
%nn), dot-separated fragments and lowercase aromatic atoms. Stereo markers
(@, /, \\) are accepted and dropped with a warning; isotopes and quadruple
bonds are rejected.

Error offsets are 0-based positions in the input string.
"""

import enum
import logging
import re
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from src.chemgraph.graph import Atom, Bond, BondOrder, MolecularGraph, SUPPORTED_ELEMENTS
from src.core.errors import ParseError

MAX_SMILES_LENGTH = 400

ORGANIC_SUBSET = ('B', 'C', 'N', 'O', 'P', 'S', 'F', 'Cl', 'Br', 'I', 'b', 'c', 'n', 'o', 'p', 's')
AROMATIC_SYMBOLS = {'b': 'B', 'c': 'C', 'n': 'N', 'o': 'O', 'p': 'P', 's': 'S'}

# allowed valences, lowest first
VALENCES = {
    'B': (3,), 'C': (4,), 'N': (3, 5), 'O': (2,), 'P': (3, 5), 'S': (2, 4, 6),
    'F': (1,), 'Cl': (1,), 'Br': (1,), 'I': (1,), 'Si': (4,), 'H': (1,),
}

# aromatic atoms that donate one electron to the ring and carry the extra bond
_RING_PI_ATOMS = {'B', 'C', 'N', 'P'}

BOND_SYMBOLS = {'-': BondOrder.SINGLE, '=': BondOrder.DOUBLE, '#': BondOrder.TRIPLE, ':': BondOrder.AROMATIC}

_BRACKET = re.compile(
    r'^\[(?P<isotope>\d+)?(?P<symbol>[A-Za-z][a-z]?)(?P<chiral>@*)'
    r'(?P<hcount>H\d*)?(?P<charge>[+-]+\d*)?(?::\d+)?\]$'
)


@enum.unique
class TokenType(enum.Enum):
    """SMILES token kinds"""
    ATOM = 1
    BOND = 2
    BRANCH_START = 3
    BRANCH_END = 4
    RING_NUM = 5
    DOT = 6
    STEREO = 7


def tokenize(smiles: str) -> Iterator[Tuple[TokenType, str, int]]:
    """Yield (token type, text, offset) triples"""
    i = 0
    n = len(smiles)
    while i < n:
        char = smiles[i]
        if char == '[':
            close = smiles.find(']', i)
            if close < 0:
                raise ParseError("unclosed bracket atom", i, smiles)
            yield TokenType.ATOM, smiles[i:close + 1], i
            i = close + 1
        elif smiles[i:i + 2] in ORGANIC_SUBSET:
            yield TokenType.ATOM, smiles[i:i + 2], i
            i += 2
        elif char in ORGANIC_SUBSET:
            yield TokenType.ATOM, char, i
            i += 1
        elif char in BOND_SYMBOLS:
            yield TokenType.BOND, char, i
            i += 1
        elif char == '$':
            raise ParseError("quadruple bonds are not supported", i, smiles)
        elif char == '.':
            yield TokenType.DOT, char, i
            i += 1
        elif char == '(':
            yield TokenType.BRANCH_START, char, i
            i += 1
        elif char == ')':
            yield TokenType.BRANCH_END, char, i
            i += 1
        elif char == '%':
            digits = smiles[i + 1:i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise ParseError("'%' must be followed by two digits", i, smiles)
            yield TokenType.RING_NUM, digits, i
            i += 3
        elif char.isdigit():
            yield TokenType.RING_NUM, char, i
            i += 1
        elif char in '/\\':
            yield TokenType.STEREO, char, i
            i += 1
        elif char.isalpha():
            raise ParseError(f"unknown element symbol '{char}'", i, smiles)
        else:
            raise ParseError(f"unexpected character '{char}'", i, smiles)


def _parse_charge(text: Optional[str]) -> int:
    if not text:
        return 0
    sign = 1 if text[0] == '+' else -1
    digits = text.lstrip('+-')
    if digits:
        return sign * int(digits)
    return sign * len(text)


def _parse_bracket(token: str, offset: int, smiles: str) -> dict:
    match = _BRACKET.match(token)
    if match is None:
        raise ParseError(f"malformed bracket atom '{token}'", offset, smiles)
    if match.group('isotope'):
        raise ParseError("isotopes are not supported", offset + 1, smiles)

    raw = match.group('symbol')
    aromatic = raw in AROMATIC_SYMBOLS
    symbol = AROMATIC_SYMBOLS.get(raw, raw)
    if symbol not in SUPPORTED_ELEMENTS:
        raise ParseError(f"unknown element symbol '{raw}'", offset + 1, smiles)
    if match.group('chiral'):
        logging.warning(f"[PARSER] chirality marker ignored at offset {offset} in {smiles}")

    hcount = match.group('hcount')
    hydrogens = 0
    if hcount:
        hydrogens = int(hcount[1:]) if len(hcount) > 1 else 1

    return {
        'symbol': symbol,
        'aromatic': aromatic,
        'charge': _parse_charge(match.group('charge')),
        'hydrogens': hydrogens,
        'bracket': True,
        'offset': offset,
    }


def _parse_organic(token: str, offset: int) -> dict:
    aromatic = token in AROMATIC_SYMBOLS
    return {
        'symbol': AROMATIC_SYMBOLS.get(token, token),
        'aromatic': aromatic,
        'charge': 0,
        'hydrogens': 0,
        'bracket': False,
        'offset': offset,
    }


class _Builder:
    """Mutable parse state; turned into a frozen MolecularGraph at the end"""

    def __init__(self, smiles: str):
        self.smiles = smiles
        self.atoms: List[dict] = []
        self.bonds: List[List] = []  # [begin, end, order or None, explicit, offset]
        self.bond_keys = set()

    def add_bond(self, begin: int, end: int, order: Optional[BondOrder], offset: int):
        key = (min(begin, end), max(begin, end))
        if begin == end:
            raise ParseError("ring closure bonds an atom to itself", offset, self.smiles)
        if key in self.bond_keys:
            raise ParseError("duplicate bond between the same atoms", offset, self.smiles)
        self.bond_keys.add(key)
        self.bonds.append([begin, end, order, order is not None, offset])

    def error(self, message: str, offset: int) -> ParseError:
        return ParseError(message, offset, self.smiles)


def _check_text(smiles: str):
    if not isinstance(smiles, str) or not smiles:
        raise ParseError("empty SMILES", 0, smiles if isinstance(smiles, str) else None)
    for i, char in enumerate(smiles):
        if ord(char) > 127:
            raise ParseError("non-ASCII character", i, smiles)
    if len(smiles) > MAX_SMILES_LENGTH:
        raise ParseError(f"SMILES longer than {MAX_SMILES_LENGTH} characters", MAX_SMILES_LENGTH, smiles)


def parse_smiles(smiles: str) -> MolecularGraph:
    """Parse SMILES text into a MolecularGraph (raises ParseError)"""
    _check_text(smiles)
    state = _Builder(smiles)

    anchor: Optional[int] = None
    pending: Optional[Tuple[BondOrder, int]] = None
    branches: List[Tuple[Optional[int], int]] = []
    ring_open: Dict[str, Tuple[int, Optional[BondOrder], int]] = {}
    last_type: Optional[TokenType] = None

    for ttype, text, offset in tokenize(smiles):
        if ttype is TokenType.ATOM:
            spec = _parse_bracket(text, offset, smiles) if text.startswith('[') else _parse_organic(text, offset)
            index = len(state.atoms)
            state.atoms.append(spec)
            if anchor is not None:
                order = pending[0] if pending else None
                state.add_bond(anchor, index, order, pending[1] if pending else offset)
            elif pending is not None:
                raise state.error("bond without a preceding atom", pending[1])
            pending = None
            anchor = index

        elif ttype is TokenType.BOND:
            if pending is not None:
                raise state.error("two bond symbols in a row", offset)
            if anchor is None:
                raise state.error("bond without a preceding atom", offset)
            pending = (BOND_SYMBOLS[text], offset)

        elif ttype is TokenType.BRANCH_START:
            if anchor is None:
                raise state.error("branch without a preceding atom", offset)
            if pending is not None:
                raise state.error("bond symbol before a branch", pending[1])
            branches.append((anchor, offset))

        elif ttype is TokenType.BRANCH_END:
            if not branches:
                raise state.error("unbalanced ')'", offset)
            if last_type is TokenType.BRANCH_START:
                raise state.error("empty branch", offset)
            if pending is not None:
                raise state.error("dangling bond at end of branch", pending[1])
            anchor, _ = branches.pop()

        elif ttype is TokenType.RING_NUM:
            if anchor is None:
                raise state.error("ring closure without a preceding atom", offset)
            order = pending[0] if pending else None
            if text in ring_open:
                other, open_order, open_offset = ring_open.pop(text)
                if order is not None and open_order is not None and order is not open_order:
                    raise state.error(f"conflicting bond orders for ring closure {text}", offset)
                state.add_bond(anchor, other, order or open_order, offset)
            else:
                ring_open[text] = (anchor, order, offset)
            pending = None

        elif ttype is TokenType.DOT:
            if pending is not None:
                raise state.error("dangling bond before '.'", pending[1])
            if last_type in (None, TokenType.DOT, TokenType.BRANCH_START):
                raise state.error("empty fragment", offset)
            anchor = None

        elif ttype is TokenType.STEREO:
            logging.warning(f"[PARSER] stereo bond marker '{text}' ignored at offset {offset} in {smiles}")
            continue

        last_type = ttype

    if pending is not None:
        raise state.error("dangling bond at end of input", pending[1])
    if branches:
        raise state.error("unclosed branch", branches[-1][1])
    if ring_open:
        first = min(v[2] for v in ring_open.values())
        raise state.error("unmatched ring closure", first)
    if last_type is TokenType.DOT:
        raise state.error("empty fragment", len(smiles) - 1)
    if not state.atoms:
        raise state.error("no atoms", 0)

    return _finish(state)


def _finish(state: _Builder) -> MolecularGraph:
    atoms = state.atoms
    n = len(atoms)

    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((b[0], b[1]) for b in state.bonds)
    bridges = {tuple(sorted(e)) for e in nx.bridges(g)}

    bonds: List[Bond] = []
    for begin, end, order, explicit, offset in state.bonds:
        in_ring = (min(begin, end), max(begin, end)) not in bridges
        both_aromatic = atoms[begin]['aromatic'] and atoms[end]['aromatic']
        if order is None:
            order = BondOrder.AROMATIC if both_aromatic and in_ring else BondOrder.SINGLE
        elif order is BondOrder.AROMATIC and not both_aromatic:
            raise state.error("aromatic bond between non-aromatic atoms", offset)
        bonds.append(Bond(begin, end, order, in_ring))

    degree = [0] * n
    bond_sum = [0] * n
    ring_member = [False] * n
    for b in bonds:
        for idx in (b.begin, b.end):
            degree[idx] += 1
            bond_sum[idx] += b.order.valence
            if b.in_ring:
                ring_member[idx] = True

    final_atoms = []
    for i, spec in enumerate(atoms):
        if spec['aromatic'] and not ring_member[i]:
            raise state.error("aromatic atom outside a ring", spec['offset'])
        hydrogens = _hydrogens(spec, bond_sum[i], state)
        final_atoms.append(Atom(
            symbol=spec['symbol'],
            charge=spec['charge'],
            aromatic=spec['aromatic'],
            hydrogens=hydrogens,
            degree=degree[i],
        ))

    ring_count = len(bonds) - n + nx.number_connected_components(g)
    graph = MolecularGraph(tuple(final_atoms), tuple(bonds), ring_count, state.smiles)
    logging.debug(f"[PARSER] {state.smiles}: {n} atoms, {len(bonds)} bonds, {ring_count} rings")
    return graph


def _hydrogens(spec: dict, bond_sum: int, state: _Builder) -> int:
    symbol = spec['symbol']
    valences = VALENCES[symbol]

    if spec['bracket']:
        total = bond_sum + spec['hydrogens']
        if total > valences[-1] + abs(spec['charge']):
            raise state.error(f"valence violation on {symbol}", spec['offset'])
        return spec['hydrogens']

    if spec['aromatic']:
        used = bond_sum + (1 if symbol in _RING_PI_ATOMS else 0)
        return max(0, valences[0] - used)

    for v in valences:
        if bond_sum <= v:
            return v - bond_sum
    raise state.error(f"valence violation on {symbol}", spec['offset'])
