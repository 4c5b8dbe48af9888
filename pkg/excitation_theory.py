"""
Excitation content of stack-equivalent topological codes.

Eigenstate excitations e_i (charges) and m_i (fluxes) are represented by the
logical Paulis Z_i and X_i.  Non-eigenstate excitations produced by earlier
walls enter as wall labels whose representative is that wall's logical gate.
Exchange (T) and braiding (S) data are squares and group commutators of the
representatives.
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from errors import SearchCapExceeded, SpecValidationError, UnresolvedLabelError, ValidationIssue
from phase_algebra import (
    HierarchyOperator, PhaseRing, group_commutator, inverse, multiply, parse_operator,
    phase_turn, render, square,
)

logger = logging.getLogger('walls.excitation_theory')

_NAMED_PHASES = {'1': Fraction(0), '-1': Fraction(1, 2), 'i': Fraction(1, 4), '-i': Fraction(3, 4)}


class Species(str, Enum):
    CHARGE = 'e'
    FLUX = 'm'


def parse_exchange_phase(value: Any) -> Fraction:
    """Exchange phase as a fraction of a turn: '-1', 'i', '-i', '1' or 'a/b'."""
    if isinstance(value, Fraction):
        return value % 1
    text = str(value).strip()
    if text in _NAMED_PHASES:
        return _NAMED_PHASES[text]
    try:
        return Fraction(text) % 1
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f'unrecognised exchange phase {value!r}') from exc


def format_turn(turn: Fraction) -> str:
    turn = turn % 1
    for name, value in _NAMED_PHASES.items():
        if value == turn:
            return name
    return f'{turn.numerator}/{turn.denominator}'


@dataclass(frozen=True)
class Factor:
    """One stacked surface code: flux dimension M and charge dimension E."""

    M: int
    E: int

    @property
    def q(self) -> int:
        return max(self.M, self.E)

    @property
    def decorated(self) -> bool:
        return self.E > self.M


@dataclass(frozen=True)
class CodeSpec:
    name: str
    d: int
    p: int = 2
    factors: Tuple[Factor, ...] = ()
    exchange_overrides: Tuple[Tuple[str, Fraction], ...] = ()
    boundary: Any = None
    representative_table: Tuple[Tuple[str, str], ...] = ()
    slot_count: Optional[int] = None

    def __post_init__(self):
        issues = []
        if self.d < 2:
            issues.append(ValidationIssue('d', 'spatial dimension must be at least 2'))
        for i, f in enumerate(self.factors):
            if f.M < 0 or f.E < 0 or f.M + f.E != self.d - 2:
                issues.append(ValidationIssue(f'factors[{i}]', f'M + E must equal d - 2 = {self.d - 2}'))
        if self.exchange_overrides and self.p != 2:
            issues.append(ValidationIssue('exchange_overrides', 'overrides are only supported for qubits'))
        if issues:
            raise SpecValidationError(issues)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def overrides(self) -> Dict[str, Fraction]:
        return dict(self.exchange_overrides)

    @property
    def table(self) -> Dict[str, str]:
        return dict(self.representative_table)

    @property
    def decorated_factors(self) -> Tuple[int, ...]:
        return tuple(i + 1 for i, f in enumerate(self.factors) if f.decorated)


@dataclass(frozen=True, order=True)
class Generator:
    index: int
    factor: int
    species: Species
    dimension: int

    @property
    def name(self) -> str:
        return f'{self.species.value}{self.factor}'


@dataclass(frozen=True)
class WallLabel:
    """A wall promoted to an excitation of its own wall dimension."""

    name: str
    dimension: int
    level: int
    representative: HierarchyOperator
    factors: Tuple[int, ...] = ()


@dataclass(frozen=True)
class CompositeExcitation:
    """Formal product: eigen powers (e_1..e_n, m_1..m_n) then labels sorted by name."""

    eigen: Tuple[int, ...]
    labels: Tuple[Tuple[str, int], ...] = ()

    @classmethod
    def vacuum(cls, n: int) -> 'CompositeExcitation':
        return cls((0,) * (2 * n))

    @classmethod
    def generator(cls, n: int, index: int, power: int = 1) -> 'CompositeExcitation':
        eigen = [0] * (2 * n)
        eigen[index] = power
        return cls(tuple(eigen))

    @classmethod
    def label(cls, n: int, name: str, power: int = 1) -> 'CompositeExcitation':
        return cls((0,) * (2 * n), ((name, power),))

    @property
    def n(self) -> int:
        return len(self.eigen) // 2

    def reduced(self, p: int) -> 'CompositeExcitation':
        labels: Dict[str, int] = {}
        for name, power in self.labels:
            labels[name] = (labels.get(name, 0) + power) % p
        return CompositeExcitation(tuple(v % p for v in self.eigen),
                                   tuple(sorted((k, v) for k, v in labels.items() if v)))

    def times(self, other: 'CompositeExcitation', p: int) -> 'CompositeExcitation':
        eigen = tuple(a + b for a, b in zip(self.eigen, other.eigen))
        return CompositeExcitation(eigen, self.labels + other.labels).reduced(p)

    def power(self, k: int, p: int) -> 'CompositeExcitation':
        return CompositeExcitation(tuple(v * k for v in self.eigen),
                                   tuple((name, v * k) for name, v in self.labels)).reduced(p)

    def is_vacuum(self) -> bool:
        return not any(self.eigen) and not self.labels

    def is_eigen(self) -> bool:
        return not self.labels

    def to_text(self) -> str:
        n = self.n
        parts = []
        for idx, power in enumerate(self.eigen):
            if power:
                species = 'e' if idx < n else 'm'
                parts.append(f'{species}{idx % n + 1}' + ('' if power == 1 else f'^{power}'))
        for name, power in self.labels:
            parts.append(name + ('' if power == 1 else f'^{power}'))
        return '*'.join(parts) if parts else '1'

    @classmethod
    def from_text(cls, text: str, n: int, p: int) -> 'CompositeExcitation':
        result = cls.vacuum(n)
        text = text.strip()
        if text in ('', '1'):
            return result
        for token in text.split('*'):
            token = token.strip()
            eigen = re.match(r'^([em])(\d+)(?:\^(\d+))?$', token)
            if eigen:
                factor = int(eigen.group(2))
                if not 1 <= factor <= n:
                    raise ValueError(f'{token!r} names factor {factor} of {n}')
                index = (factor - 1) + (n if eigen.group(1) == 'm' else 0)
                result = result.times(cls.generator(n, index, int(eigen.group(3) or 1)), p)
                continue
            label = re.match(r'^([^*^]+?)(?:\^(\d+))?$', token)
            if not label:
                raise ValueError(f'unrecognised excitation token {token!r}')
            result = result.times(cls.label(n, label.group(1), int(label.group(2) or 1)), p)
        return result


@dataclass
class STData:
    """Exchange and braiding tables over a list of named excitations."""

    names: List[str]
    T: Dict[str, HierarchyOperator] = field(default_factory=dict)
    S: Dict[Tuple[str, str], HierarchyOperator] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        def value(op: HierarchyOperator) -> str:
            turn = phase_turn(op)
            return format_turn(turn) if turn is not None else render(op)

        return {
            'excitations': list(self.names),
            'T': {name: value(op) for name, op in self.T.items()},
            'S': {f'{a},{b}': value(op) for (a, b), op in self.S.items()},
        }


def eigenstate_generators(spec: CodeSpec) -> List[Generator]:
    """e_1..e_n (dimension E_i) followed by m_1..m_n (dimension M_i)."""
    n = spec.n
    gens = [Generator(i, i + 1, Species.CHARGE, f.E) for i, f in enumerate(spec.factors)]
    gens += [Generator(n + i, i + 1, Species.FLUX, f.M) for i, f in enumerate(spec.factors)]
    return gens


def _ring_for(spec: CodeSpec) -> PhaseRing:
    if spec.p != 2:
        return PhaseRing(spec.p, 1)
    m = 1
    for _, turn in spec.exchange_overrides:
        half = Fraction(turn) / 2
        m = max(m, int(math.log2(half.denominator)) if half.denominator > 1 else 1)
    return PhaseRing(2, m)


class ExcitationModel:
    """Representatives, dimensions and S/T data for one code in one frame."""

    def __init__(self, spec: CodeSpec, labels: Iterable[WallLabel] = ()):
        self.spec = spec
        self.p = spec.p
        self.n = spec.n
        self.d = spec.d
        self.generators = eigenstate_generators(spec)
        self.ring = _ring_for(spec)
        self.slot_count = spec.slot_count or spec.n
        self.labels: Dict[str, WallLabel] = {}
        self._table = spec.table
        self._eigen_reps = [self._eigen_representative(g) for g in self.generators]
        self._rep_cache: Dict[CompositeExcitation, HierarchyOperator] = {}
        self._t_cache: Dict[CompositeExcitation, HierarchyOperator] = {}
        self._s_cache: Dict[Tuple[CompositeExcitation, CompositeExcitation], HierarchyOperator] = {}
        for label in labels:
            self.register_label(label)

    def _eigen_representative(self, gen: Generator) -> HierarchyOperator:
        if gen.name in self._table:
            rep = parse_operator(self._table[gen.name], self.ring, self.slot_count)
        elif gen.species is Species.CHARGE:
            rep = HierarchyOperator.pauli_z(self.ring, gen.factor - 1, n=self.slot_count)
        else:
            rep = HierarchyOperator.pauli_x(self.ring, gen.factor - 1, n=self.slot_count)
        turn = self.spec.overrides.get(gen.name)
        if turn:
            rep = multiply(HierarchyOperator.phase(self.ring, self.ring.exponent(Fraction(turn) / 2)), rep)
        return rep

    def table_representative(self, name: str) -> Optional[HierarchyOperator]:
        if name not in self._table:
            return None
        return parse_operator(self._table[name], self.ring, self.slot_count)

    def register_label(self, label: WallLabel) -> None:
        self.labels[label.name] = label
        logger.debug('registered wall label', extra={'extra_fields': {
            'label': label.name, 'dimension': label.dimension, 'level': label.level}})

    def generator(self, index: int, power: int = 1) -> CompositeExcitation:
        return CompositeExcitation.generator(self.n, index, power).reduced(self.p)

    def parse(self, text: str) -> CompositeExcitation:
        return CompositeExcitation.from_text(text, self.n, self.p)

    def components(self, x: CompositeExcitation) -> List[Tuple[str, int, int]]:
        """(name, dimension, power) for every nontrivial component of ``x``."""
        parts = []
        for gen, power in zip(self.generators, x.eigen):
            if power:
                parts.append((gen.name, gen.dimension, power))
        for name, power in x.labels:
            if name not in self.labels:
                raise UnresolvedLabelError(f'no wall label named {name!r}')
            parts.append((name, self.labels[name].dimension, power))
        return parts

    def representative(self, x: CompositeExcitation) -> HierarchyOperator:
        if x in self._rep_cache:
            return self._rep_cache[x]
        result = HierarchyOperator.identity(self.ring, self.slot_count)
        for rep, power in zip(self._eigen_reps, x.eigen):
            if power:
                result = multiply(result, rep ** power)
        for name, power in x.labels:
            if name not in self.labels:
                raise UnresolvedLabelError(f'no representative for wall label {name!r}')
            result = multiply(result, self.labels[name].representative ** power)
        self._rep_cache[x] = result
        return result

    def exchange(self, x: CompositeExcitation) -> HierarchyOperator:
        """T = rep(x)^2 rep(x*x)^-1; for qubits this is the plain square."""
        if x not in self._t_cache:
            rep = self.representative(x)
            doubled = self.representative(x.power(2, self.p))
            self._t_cache[x] = multiply(square(rep), inverse(doubled))
        return self._t_cache[x]

    def commutator(self, x: CompositeExcitation, y: CompositeExcitation) -> HierarchyOperator:
        """K(rep(x), rep(y)); a unitary wall preserves it exactly."""
        return group_commutator(self.representative(x), self.representative(y))

    def braiding(self, x: CompositeExcitation, y: CompositeExcitation) -> HierarchyOperator:
        """S[x, y] with T(xy) = T(x) S[x, y] T(y).

        For qubits this is the commutator K(rep(x), rep(y)). For odd p the
        commutator is antisymmetric, so S is the monodromy T(xy) T(x)^-1 T(y)^-1.
        """
        key = (x, y)
        if key not in self._s_cache:
            if self.p == 2:
                value = self.commutator(x, y)
            else:
                both = self.exchange(x.times(y, self.p))
                value = multiply(both, inverse(multiply(self.exchange(x), self.exchange(y))))
            self._s_cache[key] = value
        return self._s_cache[key]

    def eigen_vectors(self) -> Iterable[CompositeExcitation]:
        for powers in itertools.product(range(self.p), repeat=2 * self.n):
            yield CompositeExcitation(tuple(powers))


@lru_cache(maxsize=64)
def model_for(spec: CodeSpec) -> ExcitationModel:
    return ExcitationModel(spec)


def _coerce(spec: CodeSpec, x) -> CompositeExcitation:
    if isinstance(x, CompositeExcitation):
        return x
    return CompositeExcitation.from_text(str(x), spec.n, spec.p)


def representative(spec: CodeSpec, x, model: Optional[ExcitationModel] = None) -> HierarchyOperator:
    return (model or model_for(spec)).representative(_coerce(spec, x))


def exchange(spec: CodeSpec, x, model: Optional[ExcitationModel] = None) -> HierarchyOperator:
    return (model or model_for(spec)).exchange(_coerce(spec, x))


def braiding(spec: CodeSpec, x, y, model: Optional[ExcitationModel] = None) -> HierarchyOperator:
    model = model or model_for(spec)
    return model.braiding(_coerce(spec, x), _coerce(spec, y))


def st_matrices(spec: CodeSpec, cap: int = 4096) -> STData:
    """Full eigenstate-sector tables; raises SearchCapExceeded above ``cap`` excitations."""
    size = spec.p ** (2 * spec.n)
    if size > cap:
        raise SearchCapExceeded('st_table', cap, size)
    model = model_for(spec)
    excitations = list(model.eigen_vectors())
    names = [x.to_text() for x in excitations]
    data = STData(names)
    for x, name in zip(excitations, names):
        data.T[name] = model.exchange(x)
        for y, other in zip(excitations, names):
            data.S[(name, other)] = model.braiding(x, y)
    return data


# -- swapped-species frame ------------------------------------------------

def normalize_spec(spec: CodeSpec) -> Tuple[CodeSpec, Tuple[int, ...]]:
    """Swap species on factors with E > M so every factor has M >= E.

    In the swapped frame e'_i = m_i and m'_i = e_i^-1; the returned tuple lists
    the swapped (1-based) factors.
    """
    decorated = spec.decorated_factors
    if not decorated:
        return spec, ()
    if spec.representative_table:
        raise SpecValidationError([ValidationIssue(
            'representative_table', 'tabled codes must list factors with M >= E')])
    swap = {}
    for i in decorated:
        swap[f'e{i}'] = f'm{i}'
        swap[f'm{i}'] = f'e{i}'
    factors = tuple(Factor(f.E, f.M) if f.decorated else f for f in spec.factors)
    overrides = tuple(sorted((swap.get(k, k), v) for k, v in spec.exchange_overrides))
    return replace(spec, factors=factors, exchange_overrides=overrides), decorated


def to_normalized(x: CompositeExcitation, decorated: Sequence[int], p: int) -> CompositeExcitation:
    eigen = list(x.eigen)
    n = x.n
    for i in decorated:
        e, m = eigen[i - 1], eigen[n + i - 1]
        eigen[i - 1], eigen[n + i - 1] = m, (-e) % p
    return CompositeExcitation(tuple(eigen), x.labels)


def to_actual(x: CompositeExcitation, decorated: Sequence[int], p: int) -> CompositeExcitation:
    eigen = list(x.eigen)
    n = x.n
    for i in decorated:
        e, m = eigen[i - 1], eigen[n + i - 1]
        eigen[i - 1], eigen[n + i - 1] = (-m) % p, e
    return CompositeExcitation(tuple(eigen), x.labels)


def composite_from_text(text: str, spec: CodeSpec) -> CompositeExcitation:
    """Parse ``e1*m2^2*s2{1,2}`` against the code's factor count and prime."""
    return CompositeExcitation.from_text(text, spec.n, spec.p)


def st_to_json(spec: CodeSpec, cap: int = 4096) -> Dict[str, Any]:
    data = st_matrices(spec, cap).to_dict()
    data['code'] = spec.name
    return data
