#!/usr/bin/env python3
"""
Command-line front end.

    python -m cli classify --catalog stack2d --n 2
    python -m cli classify --spec my_code.json --format text
    python -m cli verify --grid d=2..5 n=1..4
    python -m cli verify --oracle --catalog stack2d --n 2
    python -m cli verify --bounds --all-catalog
    python -m cli catalog

Reports go to stdout as JSON (or text with --format text); errors go to
stderr as JSON.  Exit codes: 0 ok, 1 verification mismatch, 2 invalid
input, 3 search cap exceeded, 4 internal invariant violation.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from boundary_map import gate_group
from bounds import check_records
from code_catalog import CATALOG_DIR, CatalogEntry, builtin, list_builtins, load_spec
from config import LOG_LEVELS, config
from errors import SpecValidationError, ValidationIssue, WallsError
from excitation_theory import CodeSpec, Factor
from logging_config import init_logging
from metrics import configure_metrics
from phase_algebra import HierarchyOperator, PhaseRing, group_commutator, inverse, multiply, square
from wall_search import (
    GeneratorPrediction, brute_force_walls, classify, closed_form_generators, uniform_stack_generators,
)

logger = logging.getLogger('walls.cli')

EXIT_OK = 0
EXIT_MISMATCH = 1

# factor flux dimensions (d, [M_i]) for the mixed closed-form check
MIXED_SPECS: List[Tuple[int, Tuple[int, ...]]] = [
    (3, (1, 0)),
    (3, (0, 1)),
    (4, (2, 1)),
    (4, (2, 0)),
    (4, (1, 0, 2)),
    (4, (2, 2, 1)),
    (5, (3, 2)),
    (5, (3, 1, 2)),
    (5, (2, 3)),
    (5, (3, 3, 3)),
]


# -- spec resolution -----------------------------------------------------

def resolve_entry(args) -> CatalogEntry:
    if args.spec:
        return load_spec(args.spec)
    if not args.catalog:
        raise SpecValidationError([ValidationIssue('--catalog', 'give --catalog NAME or --spec PATH')])
    params: Dict[str, Any] = {}
    for key in ('n', 'd', 'M', 'p', 'parity', 'n_codes'):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if getattr(args, 'Ms', None):
        params['Ms'] = [int(v) for v in args.Ms.split(',')]
    return builtin(args.catalog, **params)


# -- reports --------------------------------------------------------------

def build_report(entry: CatalogEntry, result, group, include_timing: bool = False) -> Dict[str, Any]:
    body = result.to_dict()
    report: Dict[str, Any] = {
        'schema_version': config.get('report.schema_version', '1.0'),
        'code': entry.name,
        'd': body['d'],
        'p': body['p'],
        'factors': body['factors'],
        'boundary': group.variant.value,
        'wall_count': body['wall_count'],
        'truncated': body['truncated'],
        'levels': body['levels'],
        'walls': body['walls'],
        'template_walls': body['template_walls'],
        'qubits': group.qubits,
        'gates': [g.to_dict() for g in group.gates],
        'gate_generators': [g.wall for g in group.generators],
        'bounds': check_records(group.gates, entry.spec, raise_on_violation=False).to_dict(),
    }
    if group.multiplicities:
        report['multiplicities'] = group.multiplicities
    if include_timing and result.elapsed is not None:
        report['timing'] = {'classify_seconds': round(result.elapsed, 6)}
    return report


def render_text(report: Dict[str, Any]) -> str:
    lines = [
        f"Code: {report['code']} (d={report['d']}, p={report['p']}, n={len(report['factors'])}, "
        f"boundary={report['boundary']})",
        f"Wall group order: {report['wall_count'] if report['wall_count'] is not None else 'truncated'}",
        'Levels: ' + ', '.join(f'{k}: {v}' for k, v in report['levels'].items()),
        'Wall generators: ' + (', '.join(w['name'] for w in report['walls']) or 'none'),
    ]
    generators = set(report['gate_generators'])
    shown = [g for g in report['gates'] if g['wall'] in generators]
    lines.append('Gates: ' + (', '.join(
        f"{g['name']} (dim {g['support_dimension']}, level {g['level']})" for g in shown) or 'none'))
    for g in report['gates']:
        where = f" [{g['orientation']}]" if g.get('orientation') else ''
        lines.append(f"  {g['wall']}{where}: {g['text']}")
    bounds = report['bounds']
    lines.append(f"Bounds: max level {bounds['max_level']}, "
                 f"{'satisfied' if bounds['satisfied'] else 'VIOLATED'}")
    return '\n'.join(lines)


def _classify(entry: CatalogEntry, args):
    result = classify(entry.spec, args.max_level, parallelism=args.parallelism, group_cap=args.group_cap,
                      check_bounds=False)
    return result, gate_group(result)


def cmd_classify(args) -> int:
    entry = resolve_entry(args)
    result, group = _classify(entry, args)
    include_timing = args.timing or config.get('report.include_timing', False)
    report = build_report(entry, result, group, include_timing)
    fmt = args.format or config.get('report.default_format', 'json')
    if fmt == 'text':
        print(render_text(report))
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


# -- verification ---------------------------------------------------------

def _parse_range(token: str) -> Tuple[str, List[int]]:
    key, _, span = token.partition('=')
    lo, _, hi = span.partition('..')
    if not key or not lo:
        raise SpecValidationError([ValidationIssue('--grid', f'expected name=lo..hi, got {token!r}')])
    return key, list(range(int(lo), int(hi or lo) + 1))


def compare_expected(entry: CatalogEntry, result, group) -> List[Dict[str, Any]]:
    """Differences between an entry's expected block and the engine output."""
    expected = entry.expected
    actual = {
        'wall_count': result.order,
        'generators': sorted(w.name for w in result.generators),
        'gates': group.gate_names(),
        'gate_generators': group.generator_names(),
        'qubits': len(group.qubits),
        'generator_count': len(result.generators),
    }
    diffs = []
    for key, value in actual.items():
        if key not in expected:
            continue
        want = sorted(expected[key]) if isinstance(expected[key], list) else expected[key]
        if want != value:
            diffs.append({'code': entry.name, 'field': key, 'expected': want, 'actual': value,
                          'source': expected.get('source')})
    if 'gates_include' in expected:
        missing = sorted(set(expected['gates_include']) - set(actual['gates']))
        if missing:
            diffs.append({'code': entry.name, 'field': 'gates_include', 'expected': expected['gates_include'],
                          'actual': actual['gates'], 'source': expected.get('source')})
    if 'support_dimensions' in expected:
        dims = {g.name: g.support_dimension for g in group.gates}
        for name, dim in expected['support_dimensions'].items():
            if dims.get(name) != dim:
                diffs.append({'code': entry.name, 'field': f'support_dimensions.{name}',
                              'expected': dim, 'actual': dims.get(name)})
    return diffs


def _check_closed_form(spec: CodeSpec, predictions: Sequence[GeneratorPrediction],
                       args) -> Optional[Dict[str, Any]]:
    """Compare (name, wall dimension, level) of every independent generator."""
    result = classify(spec, args.max_level, parallelism=args.parallelism, enumerate_walls=False,
                      check_bounds=False)
    expected = sorted([p.name, p.dimension, p.level] for p in predictions if p.independent)
    actual = sorted([w.name, w.wall_dimension, w.level] for w in result.generators)
    if actual != expected:
        return {'code': spec.name, 'field': 'generators', 'expected': expected, 'actual': actual}
    return None


def _random_operator(rng: np.random.Generator, ring: PhaseRing, n: int, depth: int = 4) -> HierarchyOperator:
    op = HierarchyOperator.identity(ring, n)
    for _ in range(depth):
        kind = rng.integers(6)
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False)) if n > 1 else (0, 0)
        if kind == 0:
            step = HierarchyOperator.pauli_x(ring, a, n=n)
        elif kind == 1:
            step = HierarchyOperator.pauli_z(ring, a, n=n)
        elif kind == 2 and n > 1:
            step = HierarchyOperator.controlled_z(ring, [a, b])
        elif kind == 3 and ring.p == 2:
            step = HierarchyOperator.r_gate(ring, a, int(rng.integers(1, ring.m + 1)))
        elif kind == 4 and n > 1:
            step = HierarchyOperator.cnot(ring, a, b, n=n)
        else:
            step = HierarchyOperator.pauli_x(ring, a, int(rng.integers(1, ring.p)), n=n)
        op = multiply(op, step.padded(n))
    return op


def check_algebra(samples: int, seed: int) -> List[Dict[str, Any]]:
    """(AB)^2 = A^2 K(A^dag, B) B^2 on random products of named gates."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(samples):
        ring = PhaseRing(2, int(rng.integers(1, 5))) if rng.random() < 0.75 else PhaseRing(3, 1)
        n = int(rng.integers(1, 5))
        a, b = _random_operator(rng, ring, n), _random_operator(rng, ring, n)
        lhs = square(multiply(a, b))
        rhs = multiply(multiply(square(a), group_commutator(inverse(a), b)), square(b))
        if lhs != rhs:
            failures.append({'sample': i, 'A': a.to_text(), 'B': b.to_text()})
    return failures


def cmd_verify(args) -> int:
    checks: List[str] = []
    mismatches: List[Dict[str, Any]] = []

    if args.grid:
        ranges = dict(_parse_range(t) for t in args.grid)
        for d in ranges.get('d', [2, 3]):
            for n in ranges.get('n', [1, 2]):
                for M in range(0, d - 1):
                    spec = CodeSpec(f'stack-d{d}-M{M}-n{n}', d, 2, tuple(Factor(M, d - 2 - M) for _ in range(n)))
                    checks.append(spec.name)
                    diff = _check_closed_form(spec, uniform_stack_generators(d, n, M), args)
                    if diff:
                        mismatches.append(diff)

    if args.mixed:
        for d, Ms in MIXED_SPECS:
            spec = CodeSpec(f'mixed{d}d-' + '-'.join(map(str, Ms)), d, 2, tuple(Factor(M, d - 2 - M) for M in Ms))
            checks.append(spec.name)
            diff = _check_closed_form(spec, closed_form_generators(spec), args)
            if diff:
                mismatches.append(diff)

    entries: List[CatalogEntry] = []
    if args.all_catalog:
        entries = [builtin(path.stem) for path in sorted(CATALOG_DIR.glob('*.json'))]
    elif args.catalog or args.spec:
        entries = [resolve_entry(args)]

    for entry in entries:
        result, group = _classify(entry, args)
        checks.append(entry.name)
        if args.bounds:
            report = check_records(group.gates, entry.spec, raise_on_violation=False)
            for record in report.violations():
                mismatches.append({'code': entry.name, 'field': 'bounds', 'violation': record.to_dict()})
        if args.oracle:
            oracle = brute_force_walls(entry.spec)
            if oracle.order != result.order:
                mismatches.append({'code': entry.name, 'field': 'oracle_order',
                                   'expected': oracle.order, 'actual': result.order})
        if not args.bounds and not args.oracle:
            mismatches += compare_expected(entry, result, group)

    if args.algebra:
        checks.append(f'algebra x{args.algebra}')
        mismatches += check_algebra(args.algebra, args.seed)

    print(json.dumps({'checks': checks, 'mismatches': mismatches}, indent=2, sort_keys=True))
    if mismatches:
        logger.warning('verification found mismatches', extra={'extra_fields': {'count': len(mismatches)}})
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_catalog(args) -> int:
    for name, description in list_builtins().items():
        print(f'{name:16s} {description}')
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _add_spec_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--catalog', help='Builtin code or family name')
    parser.add_argument('--spec', help='Path to a JSON code spec')
    parser.add_argument('--n', type=int, help='Number of stacked codes (families)')
    parser.add_argument('--d', type=int, help='Spatial dimension (families)')
    parser.add_argument('--M', type=int, help='Flux dimension (families)')
    parser.add_argument('--p', type=int, help='Qudit prime (families)')
    parser.add_argument('--parity', choices=['odd', 'even'], help='Lattice parity (levinwen)')
    parser.add_argument('--n-codes', dest='n_codes', type=int, help='Number of codes (levinwen)')
    parser.add_argument('--Ms', help='Comma-separated flux dimensions (mixed_stack)')
    parser.add_argument('--max-level', type=int, help='Highest hierarchy level to search')
    parser.add_argument('--group-cap', type=int, help='Element cap for wall group enumeration')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Classify domain walls and logical gates of topological codes')
    parser.add_argument('--log-level', help='Log level (default from config)')
    parser.add_argument('--parallelism', type=int, help='Worker threads for the wall search')
    parser.add_argument('--seed', type=int, default=0, help='Seed for sampled property checks')
    parser.add_argument('--metrics-port', type=int, help='Expose Prometheus metrics on this port')
    sub = parser.add_subparsers(dest='command', required=True)

    classify_parser = sub.add_parser('classify', help='Classify one code')
    _add_spec_arguments(classify_parser)
    classify_parser.add_argument('--format', choices=['json', 'text'], help='Report format')
    classify_parser.add_argument('--timing', action='store_true', help='Include timing in the report')
    classify_parser.set_defaults(handler=cmd_classify)

    verify_parser = sub.add_parser('verify', help='Check the engine against closed forms and oracles')
    _add_spec_arguments(verify_parser)
    verify_parser.add_argument('--grid', nargs='+', help='Ranges like d=2..5 n=1..4')
    verify_parser.add_argument('--mixed', action='store_true', help='Check mixed-factor closed forms')
    verify_parser.add_argument('--oracle', action='store_true', help='Compare with the brute-force oracle')
    verify_parser.add_argument('--bounds', action='store_true', help='Check support/level bounds')
    verify_parser.add_argument('--all-catalog', action='store_true', help='Run over every fixed catalog entry')
    verify_parser.add_argument('--algebra', type=int, default=0, help='Sample this many algebra identities')
    verify_parser.set_defaults(handler=cmd_verify)

    catalog_parser = sub.add_parser('catalog', help='List builtin codes')
    catalog_parser.set_defaults(handler=cmd_catalog)
    return parser


def validate_run(args) -> None:
    """Range-check the run options and the active configuration."""
    issues = [ValidationIssue(*problem.split(' ', 1)) for problem in config.validate()]
    for flag, attr, low in (('--parallelism', 'parallelism', 1), ('--group-cap', 'group_cap', 1),
                            ('--max-level', 'max_level', 1), ('--algebra', 'algebra', 0)):
        value = getattr(args, attr, None)
        if value is not None and value < low:
            issues.append(ValidationIssue(flag, f'must be >= {low}'))
    if args.metrics_port is not None and not 0 < args.metrics_port < 65536:
        issues.append(ValidationIssue('--metrics-port', 'must be a TCP port'))
    if args.log_level and args.log_level.upper() not in LOG_LEVELS:
        issues.append(ValidationIssue('--log-level', f'{args.log_level!r} is not recognised'))
    if issues:
        raise SpecValidationError(issues)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        validate_run(args)
    except SpecValidationError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    init_logging(
        app_name=config.get('logging.app_name', 'walls'),
        log_level=args.log_level or config.get('logging.level', 'WARNING'),
        enable_file_logging=config.get('logging.file_logging', False),
        enable_json=config.get('logging.json', True),
    )
    if args.metrics_port or config.get('metrics.enabled', False):
        configure_metrics(True, args.metrics_port or config.get('metrics.port'))
    for attr in ('max_level', 'group_cap', 'timing', 'format'):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        return args.handler(args)
    except WallsError as exc:
        logger.error('command failed', extra={'extra_fields': exc.to_dict()})
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return exc.exit_code


if __name__ == '__main__':
    sys.exit(main())
