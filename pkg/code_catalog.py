"""
Built-in code specifications and ingestion of user-supplied ones.

Fixed entries ship as JSON under ``catalog/``; parameterised families are
generated on demand.  Every entry carries an ``expected`` block whose
``source`` string says where its numbers come from.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import galois

from boundary_map import BoundarySpec, BoundaryVariant
from errors import OperatorParseError, SpecValidationError, UnknownCatalogEntry, ValidationIssue
from excitation_theory import CodeSpec, Factor, _ring_for, parse_exchange_phase
from phase_algebra import parse_operator
from wall_search import independent_names, closed_form_generators

logger = logging.getLogger('walls.code_catalog')

CATALOG_DIR = Path(__file__).parent / 'catalog'


@dataclass
class CatalogEntry:
    spec: CodeSpec
    description: str = ''
    expected: Dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.spec.name


# -- validation ----------------------------------------------------------

def _generator_names(n: int) -> List[str]:
    return [f'{s}{i}' for s in 'em' for i in range(1, n + 1)]


def validate(data: Dict[str, Any]) -> List[ValidationIssue]:
    """Every problem with a spec document, each with a path into the JSON."""
    issues: List[ValidationIssue] = []
    if not isinstance(data, dict):
        return [ValidationIssue('$', 'spec must be a JSON object')]
    if not data.get('name'):
        issues.append(ValidationIssue('name', 'missing'))
    d = data.get('d')
    if not isinstance(d, int) or d < 2:
        issues.append(ValidationIssue('d', 'must be an integer >= 2'))
        return issues
    p = data.get('p', 2)
    if not isinstance(p, int) or not galois.is_prime(p):
        issues.append(ValidationIssue('p', f'{p!r} is not prime'))
        return issues
    factors = data.get('factors')
    if not isinstance(factors, list) or not factors:
        issues.append(ValidationIssue('factors', 'need at least one factor'))
        return issues
    for i, f in enumerate(factors):
        if not isinstance(f, dict) or 'M' not in f:
            issues.append(ValidationIssue(f'factors[{i}]', 'needs an M entry'))
            continue
        M, E = f['M'], f.get('E', d - 2 - f['M'])
        if not isinstance(M, int) or not isinstance(E, int) or M < 0 or E < 0 or M + E != d - 2:
            issues.append(ValidationIssue(f'factors[{i}]', f'M + E must equal d - 2 = {d - 2}, got M={M}, E={E}'))
    if issues:
        return issues

    n = len(factors)
    names = set(_generator_names(n))
    overrides = data.get('exchange_overrides') or {}
    if overrides and p != 2:
        issues.append(ValidationIssue('exchange_overrides', 'overrides are only supported for qubits'))
    for key, value in overrides.items():
        if key not in names:
            issues.append(ValidationIssue(f'exchange_overrides.{key}', 'not an eigenstate generator'))
        try:
            parse_exchange_phase(value)
        except (ValueError, ZeroDivisionError) as exc:
            issues.append(ValidationIssue(f'exchange_overrides.{key}', str(exc)))
    if issues:
        return issues

    try:
        spec = _build(data)
    except SpecValidationError as exc:
        return list(exc.errors)
    except ValueError as exc:
        return [ValidationIssue('boundary', str(exc))]

    ring = _ring_for(spec)
    slots = spec.slot_count or spec.n
    for key, text in spec.representative_table:
        try:
            parse_operator(text, ring, slots)
        except OperatorParseError as exc:
            issues.append(ValidationIssue(f'representative_table.{key}', str(exc)))
    table = spec.table
    for i in range(1, n + 1):
        e, m = table.get(f'e{i}'), table.get(f'm{i}')
        if table and (e is None) != (m is None):
            issues.append(ValidationIssue('representative_table', f'factor {i} needs both e{i} and m{i}'))
    if spec.boundary is not None:
        issues += spec.boundary.validate(spec)
    return issues


def _build(data: Dict[str, Any]) -> CodeSpec:
    d = data['d']
    factors = tuple(Factor(f['M'], f.get('E', d - 2 - f['M'])) for f in data['factors'])
    overrides = tuple(sorted((k, parse_exchange_phase(v)) for k, v in (data.get('exchange_overrides') or {}).items()))
    boundary = BoundarySpec.from_dict(data.get('boundary'))
    slot_count = data.get('slot_count')
    if slot_count is None and boundary.variant is BoundaryVariant.TABLED:
        slot_count = len(factors) * boundary.qubits_per_code
    return CodeSpec(
        name=data['name'],
        d=d,
        p=data.get('p', 2),
        factors=factors,
        exchange_overrides=overrides,
        boundary=boundary,
        representative_table=tuple(sorted((data.get('representative_table') or {}).items())),
        slot_count=slot_count,
    )


def spec_from_dict(data: Dict[str, Any]) -> CodeSpec:
    issues = validate(data)
    if issues:
        raise SpecValidationError(issues)
    return _build(data)


def entry_from_dict(data: Dict[str, Any]) -> CatalogEntry:
    return CatalogEntry(spec_from_dict(data), data.get('description', ''), dict(data.get('expected') or {}))


def _format_turn(turn: Fraction) -> str:
    named = {Fraction(1, 2): '-1', Fraction(1, 4): 'i', Fraction(3, 4): '-i'}
    return named.get(turn, f'{turn.numerator}/{turn.denominator}')


def dump_spec(spec: CodeSpec, expected: Optional[Dict[str, Any]] = None, description: str = '') -> Dict[str, Any]:
    """JSON document that ``spec_from_dict`` reads back to ``spec``."""
    data: Dict[str, Any] = {
        'name': spec.name,
        'd': spec.d,
        'p': spec.p,
        'factors': [{'M': f.M, 'E': f.E} for f in spec.factors],
    }
    if description:
        data['description'] = description
    if spec.exchange_overrides:
        data['exchange_overrides'] = {k: _format_turn(Fraction(v)) for k, v in spec.exchange_overrides}
    if spec.boundary is not None and spec.boundary.variant is not BoundaryVariant.STACK:
        data['boundary'] = spec.boundary.to_dict()
    if spec.representative_table:
        data['representative_table'] = dict(spec.representative_table)
    if expected:
        data['expected'] = expected
    return data


def load_spec(path: Union[str, Path]) -> CatalogEntry:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecValidationError([ValidationIssue('$', f'{path.name}: {exc}')]) from exc
    entry = entry_from_dict(data)
    logger.info('loaded spec', extra={'extra_fields': {'path': str(path), 'code': entry.name}})
    return entry


# -- families ----------------------------------------------------------------

def _closed_form(spec: CodeSpec) -> Dict[str, Any]:
    return {
        'generators': independent_names(closed_form_generators(spec)),
        'source': 'closed-form generator list for stacks of surface codes',
    }


def stack2d(n: int = 2) -> CatalogEntry:
    spec = CodeSpec(f'stack2d-n{n}', 2, 2, tuple(Factor(0, 0) for _ in range(n)))
    expected = _closed_form(spec)
    expected['gates'] = ['CZ', 'H'] if n > 1 else ['H']
    if n == 2:
        expected['wall_count'] = 72
        expected['source'] = 'two stacked 2D surface codes form a group of 72 walls'
    return CatalogEntry(spec, f'{n} stacked 2D surface codes', expected)


def stack3d(n: int = 3) -> CatalogEntry:
    spec = CodeSpec(f'stack3d-n{n}', 3, 2, tuple(Factor(1, 0) for _ in range(n)))
    expected = _closed_form(spec)
    gates = {1: [], 2: ['CNOT', 'CZ']}.get(n, ['CCZ', 'CNOT', 'CZ'])
    expected['gates'] = gates
    return CatalogEntry(spec, f'{n} stacked 3D surface codes', expected)


def colour_d(d: int) -> CatalogEntry:
    """d copies of the d-dimensional surface code glued into a colour code."""
    if d < 2:
        raise UnknownCatalogEntry(f'colour_d needs d >= 2, got {d}')
    factors = tuple(Factor(d - 2, 0) for _ in range(d))
    partition = (tuple(f'e{i}' for i in range(1, d + 1)), tuple(f'm{i}' for i in range(1, d + 1)))
    spec = CodeSpec(f'colour{d}d', d, 2, factors,
                    boundary=BoundarySpec(BoundaryVariant.ATTACH, partition))
    gates = [f'R{k}' for k in range(2, d + 1)] + (['H'] if d == 2 else [])
    expected = {
        'gates': sorted(gates),
        'gate_generators': sorted(['H', 'R2'] if d == 2 else [f'R{d}']),
        'qubits': 1,
        'source': 'colour codes carry R_k for every k <= d, and H only when d = 2',
    }
    return CatalogEntry(spec, f'{d}-dimensional colour code', expected)


def torus_d(d: int, M: int, n: int = 1) -> CatalogEntry:
    if not 0 <= M <= d - 2:
        raise UnknownCatalogEntry(f'torus_d needs 0 <= M <= d - 2, got M={M}')
    spec = CodeSpec(f'torus{d}d-M{M}-n{n}', d, 2, tuple(Factor(M, d - 2 - M) for _ in range(n)),
                    boundary=BoundarySpec(BoundaryVariant.TORUS))
    stacked = CodeSpec(spec.name, d, 2, spec.factors)
    expected = _closed_form(stacked)
    expected['source'] = 'holes add qubits but no new walls'
    return CatalogEntry(spec, f'{n} {d}D surface codes with periodic boundaries', expected)


def levinwen(parity: str = 'odd', n_codes: int = 2) -> CatalogEntry:
    """Stacked Levin-Wen fermion codes on an L^3 torus; ``parity`` is that of L."""
    if parity not in ('odd', 'even'):
        raise UnknownCatalogEntry(f'levinwen parity must be odd or even, got {parity!r}')
    k = 2 if parity == 'odd' else 3
    orientations = {'odd': [('xz', (1, 2))], 'even': [('xy', (1, 2)), ('yz', (2, 3)), ('zx', (1, 3))]}[parity]

    def slot(code, q):
        return (code - 1) * k + q

    table = {}
    gate_table = []
    for c in range(1, n_codes + 1):
        table[f'e{c}'] = f'Z{slot(c, 1)}'
        table[f'm{c}'] = f'X{slot(c, 1)}'
        table[f'p{c}'] = f'CZ{{{slot(c, 1)},{slot(c, 2)}}}'
        for name, (a, b) in orientations:
            gate_table.append({'wall': f'p{c}', 'orientation': name, 'gate': f'CZ{{{slot(c, a)},{slot(c, b)}}}'})
    for i, j in combinations(range(1, n_codes + 1), 2):
        swaps = '*'.join(f'SWAP{{{slot(i, q)},{slot(j, q)}}}' for q in range(1, k + 1))
        gate_table.append({'wall': f'w{{{i},{j}}}', 'orientation': 'any', 'gate': swaps})
    data = {
        'name': f'levinwen-{parity}-n{n_codes}',
        'd': 3,
        'factors': [{'M': 1} for _ in range(n_codes)],
        'exchange_overrides': {f'e{c}': '-1' for c in range(1, n_codes + 1)},
        'boundary': {'variant': 'tabled', 'qubits_per_code': k, 'gate_table': gate_table},
        'representative_table': table,
    }
    expected = {
        'gates': ['CZ', 'SWAP'] if n_codes > 1 else ['CZ'],
        'qubits': k * n_codes,
        'source': 'fermionic charges admit only m -> em within a code and swaps between codes',
    }
    return CatalogEntry(spec_from_dict(data), f'{n_codes} Levin-Wen codes, L {parity}', expected)


def qdouble(p: int = 3, n: int = 1) -> CatalogEntry:
    spec = CodeSpec(f'qdouble{p}-n{n}', 2, p, tuple(Factor(0, 0) for _ in range(n)))
    expected: Dict[str, Any] = {'source': 'brute-force oracle over the eigenstate sector'}
    if n == 1 and p == 3:
        expected['wall_count'] = 2
    return CatalogEntry(spec, f'{n} copies of the Z{p} quantum double', expected)


def mixed_stack(d: int, Ms: Sequence[int]) -> CatalogEntry:
    spec = spec_from_dict({
        'name': f'mixed{d}d-' + '-'.join(map(str, Ms)),
        'd': d,
        'factors': [{'M': M} for M in Ms],
    })
    return CatalogEntry(spec, f'stack of {d}D surface codes with flux dimensions {list(Ms)}', _closed_form(spec))


FAMILIES: Dict[str, Callable[..., CatalogEntry]] = {
    'stack2d': stack2d,
    'stack3d': stack3d,
    'colour_d': colour_d,
    'torus_d': torus_d,
    'levinwen': levinwen,
    'qdouble': qdouble,
    'mixed_stack': mixed_stack,
}


def list_builtins() -> Dict[str, str]:
    """Name -> one-line description for every fixed entry and family."""
    names = {}
    for path in sorted(CATALOG_DIR.glob('*.json')):
        data = json.loads(path.read_text())
        names[path.stem] = data.get('description', '')
    for name, fn in FAMILIES.items():
        names[name] = (fn.__doc__ or f'{name} family').strip().splitlines()[0]
    return dict(sorted(names.items()))


def builtin(name: str, **params) -> CatalogEntry:
    """Fixed catalog entry by name, or a family instance built from ``params``."""
    path = CATALOG_DIR / f'{name}.json'
    if path.exists() and not params:
        return entry_from_dict(json.loads(path.read_text()))
    if name in FAMILIES:
        try:
            return FAMILIES[name](**params)
        except TypeError as exc:
            raise UnknownCatalogEntry(f'bad parameters for {name}: {exc}') from exc
    raise UnknownCatalogEntry(f'no catalog entry named {name!r}')
