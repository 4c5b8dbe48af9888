"""
Logical gate synthesis.

Clifford gates are built from their symplectic action by a Hadamard-set
choice followed by a lower/block/upper factorisation; diagonal gates of
higher hierarchy level are integrated from the commutators they must have
with each X.  Every synthesized gate is checked by conjugation before it
leaves this module.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from errors import SynthesisError
from phase_algebra import (
    HierarchyOperator, PhasePolynomial, PhaseRing, conjugate, equal_up_to_phase,
    hierarchy_level, multiply, pauli_from_vector, pauli_vector, render, strip_phase, symplectic_action,
)

logger = logging.getLogger('walls.synthesis')


@dataclass(frozen=True)
class FourierLayer:
    """F^power on each listed slot; F Z F^dag = X^-1 and F X F^dag = Z."""

    slots: Tuple[int, ...]
    power: int = 1

    def matrix(self, n: int, p: int) -> np.ndarray:
        single = {
            0: np.eye(2, dtype=np.int64),
            1: np.array([[0, 1], [-1, 0]], dtype=np.int64),
            2: -np.eye(2, dtype=np.int64),
            3: np.array([[0, -1], [1, 0]], dtype=np.int64),
        }[self.power % 4]
        mat = np.eye(2 * n, dtype=np.int64)
        for s in self.slots:
            idx = [s, n + s]
            mat[np.ix_(idx, idx)] = single
        return mat % p

    def inverse(self, p: int) -> 'FourierLayer':
        return FourierLayer(self.slots, (-self.power) % (2 if p == 2 else 4))

    def text(self, p: int, slot_names: Optional[Sequence[str]] = None) -> str:
        head = 'H' if p == 2 else 'F'
        refs = [slot_names[s] if slot_names else str(s + 1) for s in self.slots]
        power = '' if self.power % 4 == 1 else f'^{self.power % 4}'
        return f'{head}{{{",".join(refs)}}}{power}'


Layer = Union[HierarchyOperator, FourierLayer]


@dataclass(frozen=True)
class LogicalGate:
    """Ordered layers, applied first to last."""

    ring: PhaseRing
    n: int
    layers: Tuple[Layer, ...] = ()

    @classmethod
    def from_layers(cls, ring: PhaseRing, n: int, layers: Sequence[Layer]) -> 'LogicalGate':
        merged: List[Layer] = []
        for layer in layers:
            if isinstance(layer, FourierLayer):
                power = layer.power % (2 if ring.p == 2 else 4)
                if not layer.slots or not power:
                    continue
                merged.append(FourierLayer(tuple(layer.slots), power))
                continue
            layer = layer.padded(n)
            if merged and isinstance(merged[-1], HierarchyOperator):
                layer = multiply(layer, merged.pop())
            merged.append(layer)
        merged = [l for l in merged
                  if isinstance(l, FourierLayer) or l != HierarchyOperator.identity(l.ring, n)]
        rings = [l.ring for l in merged if isinstance(l, HierarchyOperator)]
        for r in rings:
            ring = ring.join(r)
        return cls(ring, n, tuple(merged))

    @classmethod
    def of(cls, op: HierarchyOperator, n: Optional[int] = None) -> 'LogicalGate':
        return cls.from_layers(op.ring, max(n or 0, op.n), [op])

    @property
    def p(self) -> int:
        return self.ring.p

    def is_operator(self) -> bool:
        return all(isinstance(l, HierarchyOperator) for l in self.layers)

    def as_operator(self) -> HierarchyOperator:
        if not self.is_operator():
            raise SynthesisError('gate contains Fourier layers and has no phase-polynomial form')
        result = HierarchyOperator.identity(self.ring, self.n)
        for layer in self.layers:
            result = multiply(layer, result)
        return result

    def level(self) -> int:
        level = 1
        for layer in self.layers:
            level = max(level, 2 if isinstance(layer, FourierLayer) else hierarchy_level(layer))
        return level

    def symplectic_matrix(self) -> np.ndarray:
        n, p = self.n, self.p
        mat = np.eye(2 * n, dtype=np.int64)
        for layer in self.layers:
            step = (layer.matrix(n, p) if isinstance(layer, FourierLayer)
                    else symplectic_action(layer, n))
            mat = (mat @ step) % p
        return mat

    def support(self) -> Tuple[int, ...]:
        slots = set()
        for layer in self.layers:
            slots.update(layer.slots if isinstance(layer, FourierLayer) else layer.support())
        return tuple(sorted(slots))

    @property
    def name(self) -> str:
        return gate_name(self)

    def conjugate_pauli(self, pauli: HierarchyOperator) -> HierarchyOperator:
        """G P G^dag layer by layer; a Fourier layer moves the Pauli vector and drops its phase."""
        result = pauli.padded(self.n)
        for layer in self.layers:
            if isinstance(layer, FourierLayer):
                vec = pauli_vector(result)
                if vec is None:
                    raise SynthesisError(f'{render(result)} is not a Pauli operator')
                row = (np.array(vec[0] + vec[1], dtype=np.int64) @ layer.matrix(self.n, self.p)) % self.p
                result = pauli_from_vector(result.ring, row[:self.n].tolist(), row[self.n:].tolist())
            else:
                result = conjugate(layer, result)
        return result

    def conjugated_by_fourier(self, slots: Sequence[int]) -> 'LogicalGate':
        """F^dag G F on ``slots``: change of basis for swapped species."""
        if not slots:
            return self
        f = FourierLayer(tuple(slots), 1)
        return LogicalGate.from_layers(self.ring, self.n, [f, *self.layers, f.inverse(self.p)])

    def text(self, slot_names: Optional[Sequence[str]] = None) -> str:
        if not self.layers:
            return 'I'
        parts = [l.text(self.p, slot_names) if isinstance(l, FourierLayer) else render(l, slot_names)
                 for l in self.layers]
        return ' ; '.join(parts)


def _gf(p: int):
    return galois.GF(p)


def _blocks(mat, n):
    return mat[:n, :n], mat[:n, n:], mat[n:, :n], mat[n:, n:]


def quadratic_form(ring: PhaseRing, sym: np.ndarray) -> HierarchyOperator:
    """Diagonal Clifford D with D X_k D^dag = X_k Z^{sym[k]} up to phase."""
    n = sym.shape[0]
    p = ring.p
    if p == 2 and any(int(sym[i, i]) % 2 for i in range(n)):
        ring = ring.lift(max(ring.m, 2))
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            c = int(sym[i, j]) % p
            if c:
                terms.append(((i, j), ring.pauli_unit * c))
        c = int(sym[i, i]) % p
        if c:
            if p == 2:
                terms.append(((i,), ring.modulus >> 2))
            else:
                terms.append((((i, 2),), c * pow(2, -1, p)))
    return HierarchyOperator.diagonal(PhasePolynomial.from_terms(ring, terms), n)


def synthesize_clifford(matrix: np.ndarray, ring: PhaseRing) -> LogicalGate:
    """Realise a symplectic matrix (rows: images of X_1..X_n, Z_1..Z_n)."""
    p = ring.p
    GF = _gf(p)
    mat = np.asarray(matrix, dtype=np.int64) % p
    n = mat.shape[0] // 2
    A, B, _, _ = _blocks(mat, n)
    reduced = GF(np.hstack([A, B])).row_reduce()
    pivots = set()
    for row in np.asarray(reduced, dtype=np.int64):
        nonzero = np.flatnonzero(row)
        if nonzero.size and nonzero[0] < n:
            pivots.add(int(nonzero[0]))
    hadamards = tuple(i for i in range(n) if i not in pivots)
    f_s = FourierLayer(hadamards, 1)
    shifted = GF((mat @ f_s.matrix(n, p)) % p)
    A1, B1, C1, _ = _blocks(shifted, n)
    try:
        a_inv = np.linalg.inv(A1)
    except np.linalg.LinAlgError as exc:
        raise SynthesisError('symplectic matrix has no invertible Lagrangian pivot block') from exc
    lower = np.asarray(C1 @ a_inv, dtype=np.int64)
    upper = np.asarray(a_inv @ B1, dtype=np.int64)

    layers: List[Layer] = []
    k_slots = tuple(i for i in range(n) if lower[i].any() or lower[:, i].any())
    if k_slots:
        f_k = FourierLayer(k_slots, 1)
        layers += [f_k, quadratic_form(ring, (-lower) % p), f_k.inverse(p)]
    layers.append(HierarchyOperator.linear_map(ring, np.asarray(A1, dtype=np.int64).T.tolist()))
    layers.append(quadratic_form(ring, upper))
    layers.append(f_s.inverse(p))
    gate = LogicalGate.from_layers(ring, n, layers)
    if not np.array_equal(gate.symplectic_matrix() % p, mat):
        raise SynthesisError('synthesized Clifford does not reproduce the requested action')
    logger.debug('synthesized Clifford', extra={'extra_fields': {'n': n, 'hadamards': list(hadamards)}})
    return gate


def synthesize_diagonal(appended: Dict[int, HierarchyOperator], n: int, ring: PhaseRing) -> LogicalGate:
    """Diagonal g with g X_i g^dag = X_i * appended[i] up to phase, X_j fixed otherwise."""
    for op in appended.values():
        if not op.is_diagonal():
            raise SynthesisError(f'appended operator {op.to_text()} is not diagonal')
        ring = ring.join(op.ring)
    p = ring.p
    if p == 2:
        ring = ring.lift(ring.m + 1)
    mod = ring.modulus
    polys = {i: op.lifted(ring.m).padded(n).phase_poly for i, op in appended.items()}
    zero = (0,) * n

    shifts: Dict[int, int] = {}
    for i, poly in polys.items():
        if p == 2:
            e_i = tuple(int(j == i) for j in range(n))
            total = poly.evaluate(zero) + poly.evaluate(e_i)
            if total % 2:
                raise SynthesisError(f'commutator with X{i + 1} squares to a non-phase')
            shifts[i] = (-(total // 2)) % mod
        else:
            total = sum(poly.evaluate(tuple(t if j == i else 0 for j in range(n))) for t in range(p))
            if total % p:
                raise SynthesisError(f'slot {i + 1} would need a p^2-th root of unity')
            shifts[i] = 0

    table = np.zeros((p,) * n, dtype=np.int64)
    for point in itertools.product(range(p), repeat=n):
        if not any(point):
            continue
        i = next(j for j, v in enumerate(point) if v)
        prev = list(point)
        prev[i] -= 1
        prev = tuple(prev)
        step = polys[i].evaluate(prev) + shifts[i] if i in polys else 0
        table[point] = (table[prev] + step) % mod
    poly = PhasePolynomial.from_values(ring, n, table)
    op = HierarchyOperator.diagonal(poly, n)
    for i in range(n):
        x_i = HierarchyOperator.pauli_x(ring, i, n=n)
        expected = multiply(x_i, appended[i]) if i in appended else x_i
        if not equal_up_to_phase(conjugate(op, x_i), expected):
            raise SynthesisError(f'diagonal synthesis is inconsistent along slot {i + 1}')
    return LogicalGate.of(op, n)


def verify_action(gate: LogicalGate, expected: np.ndarray) -> bool:
    """True when the gate's symplectic action equals ``expected``; raises otherwise."""
    actual = gate.symplectic_matrix()
    if not np.array_equal(actual % gate.p, np.asarray(expected) % gate.p):
        raise SynthesisError('gate does not conjugate Paulis as required')
    return True


# -- naming --------------------------------------------------------------

_QUBIT_LOCAL = {
    ((0, 1), (1, 0)): 'H',
    ((1, 1), (0, 1)): 'R2',
    ((1, 0), (1, 1)): 'R2^H',
}


def _local_name(block: np.ndarray, p: int) -> Optional[str]:
    key = tuple(tuple(int(v) % p for v in row) for row in block)
    if key == ((1, 0), (0, 1)):
        return None
    if p == 2:
        return _QUBIT_LOCAL.get(key, 'C1')
    if key == ((0, 1), (p - 1, 0)):
        return 'F'
    if key == ((0, p - 1), (1, 0)):
        return 'F^3'
    if key[0][1] == 0 and key[1][0] == 0:
        return 'F^2' if key[0][0] == p - 1 and key[1][1] == p - 1 else 'M'
    if key[0][0] == 1 and key[1][1] == 1 and key[1][0] == 0:
        return 'P'
    return 'C1'


def clifford_name(mat: np.ndarray, p: int) -> str:
    n = mat.shape[0] // 2
    mat = np.asarray(mat, dtype=np.int64) % p
    if np.array_equal(mat, np.eye(2 * n, dtype=np.int64)):
        return 'I'
    targets = []
    for i in range(n):
        cols = np.flatnonzero(mat[i] | mat[n + i]) if p == 2 else np.flatnonzero(mat[i] + mat[n + i])
        slots = {int(c) % n for c in cols}
        targets.append(slots)
    if all(len(t) == 1 for t in targets) and len({next(iter(t)) for t in targets}) == n:
        names = set()
        perm = [next(iter(t)) for t in targets]
        for i, j in enumerate(perm):
            block = mat[np.ix_([i, n + i], [j, n + j])]
            name = _local_name(block, p)
            if name:
                names.add(name)
        if perm != list(range(n)):
            names.add('SWAP')
        return '*'.join(sorted(names)) or 'I'
    A, B, C, D = _blocks(mat, n)
    eye = np.eye(n, dtype=np.int64)
    if not B.any() and not C.any():
        return 'CNOT'
    if np.array_equal(A, eye) and np.array_equal(D, eye) and not C.any():
        names = []
        if (B - np.diag(np.diag(B))).any():
            names.append('CZ')
        if np.diag(B).any():
            names.append('R2')
        return '*'.join(names)
    if np.array_equal(A, eye) and np.array_equal(D, eye) and not B.any():
        return 'CZ^H'
    return 'Clifford'


def _token_kind(token: str) -> str:
    head = token.split('{')[0].split('[')[0].split('^')[0]
    return head.rstrip('0123456789') if head[:1] in 'XZ' else head


def gate_name(gate: LogicalGate) -> str:
    """Canonical family name, ignoring Pauli factors and global phase."""
    if gate.level() <= 2:
        return clifford_name(gate.symplectic_matrix(), gate.p)
    kinds = set()
    for layer in gate.layers:
        if isinstance(layer, FourierLayer):
            continue
        for token in render(layer).split('*'):
            kind = _token_kind(token)
            if kind not in ('w', 'X', 'Z', 'I'):
                kinds.add(kind)
    # lower-level terms ride along with the leading ones
    top = {k for k in kinds if k not in ('CZ', 'R2')} or kinds
    name = '*'.join(sorted(top))
    if any(isinstance(l, FourierLayer) for l in gate.layers):
        name += '^H'
    return name


# -- generated-subgroup tests -------------------------------------------

def group_closure(elements, multiply_fn, key_fn, cap: int):
    seen = {}
    queue = deque()
    for e in elements:
        k = key_fn(e)
        if k not in seen:
            seen[k] = e
            queue.append(e)
    while queue:
        current = queue.popleft()
        for g in elements:
            nxt = multiply_fn(current, g)
            k = key_fn(nxt)
            if k not in seen:
                if len(seen) >= cap:
                    return None
                seen[k] = nxt
                queue.append(nxt)
    return seen


def is_generated(candidate: LogicalGate, selected: Sequence[LogicalGate], cap: int = 4096) -> bool:
    """Whether ``candidate`` lies in the group generated by ``selected`` (mod Paulis and phase)."""
    if not selected:
        return candidate.level() <= 1
    n = candidate.n
    diag = [strip_phase(g.as_operator().padded(n)) for g in selected if g.is_operator()]
    closure_ops = {}
    if diag:
        closure_ops = group_closure(diag, lambda a, b: strip_phase(multiply(a, b)), lambda a: a, cap) or {}
        if candidate.is_operator() and strip_phase(candidate.as_operator().padded(n)) in closure_ops:
            return True
    if candidate.level() > 2:
        return False
    p = candidate.p
    mats = [g.symplectic_matrix() for g in selected if g.level() <= 2]
    mats += [symplectic_action(op, n) for op in closure_ops if hierarchy_level(op) <= 2]
    if not mats:
        return False
    group = group_closure(mats, lambda a, b: (a @ b) % p, lambda a: a.tobytes(), cap)
    if group is None:
        logger.debug('closure cap reached while testing generation')
        return False
    return (candidate.symplectic_matrix() % p).tobytes() in group


def independent_gates(gates: Sequence[LogicalGate], cap: int = 4096) -> List[int]:
    """Greedy generator choice, highest level first, then name; later picks can make earlier ones redundant."""
    order = sorted(range(len(gates)), key=lambda i: (-gates[i].level(), gate_name(gates[i]), i))
    chosen: List[int] = []
    for i in order:
        if not is_generated(gates[i], [gates[j] for j in chosen], cap):
            chosen.append(i)
    for i in reversed(list(chosen)):
        rest = [gates[j] for j in chosen if j != i]
        if rest and is_generated(gates[i], rest, cap):
            chosen.remove(i)
    return sorted(chosen)


@dataclass
class GateRecord:
    """A logical gate attached to the wall (or reduced wall) it realises."""

    wall: str
    gate: LogicalGate
    support_dimension: int
    slot_names: Optional[Tuple[str, ...]] = None
    orientation: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    display_name: Optional[str] = None

    @property
    def name(self) -> str:
        return self.display_name or self.gate.name

    @property
    def level(self) -> int:
        return self.gate.level()

    @property
    def text(self) -> str:
        return self.gate.text(self.slot_names)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'wall': self.wall,
            'name': self.name,
            'text': self.text,
            'support_dimension': self.support_dimension,
            'level': self.level,
            'slots': [self.slot_names[s] if self.slot_names else s + 1 for s in self.gate.support()],
        }
        if self.orientation:
            data['orientation'] = self.orientation
        data.update(self.metadata)
        return data
