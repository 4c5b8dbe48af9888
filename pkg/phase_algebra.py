"""
Exact algebra of generalized Pauli and diagonal Clifford-hierarchy operators.

An operator is stored symbolically as

    U|x> = w^{f(x)} |A x + a>

with ``a`` the X part, ``A`` an optional invertible linear part over Z_p and
``f`` a phase polynomial in the slot variables.  ``w`` is the primitive
2^m-th root of unity for qubits and the p-th root for odd primes.  Products,
inverses, squares and group commutators are computed exactly; nothing here
touches floating point.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from errors import OperatorParseError, RingMismatchError

logger = logging.getLogger('walls.phase_algebra')

Monomial = Tuple[Tuple[int, int], ...]
Matrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, order=True)
class PhaseRing:
    """Phase exponents live in Z_{p^m}; only qubits may use m > 1."""

    p: int = 2
    m: int = 1

    def __post_init__(self):
        if not galois.is_prime(self.p):
            raise ValueError(f'qudit dimension {self.p} is not prime')
        if self.m < 1:
            raise ValueError('precision must be at least 1')
        if self.p != 2 and self.m != 1:
            raise ValueError('odd primes only support p-th root phases (m = 1)')

    @property
    def modulus(self) -> int:
        return self.p ** self.m

    @property
    def pauli_unit(self) -> int:
        """Exponent of the Z eigenvalue phase exp(2 pi i / p)."""
        return self.modulus // self.p

    def lift(self, m: int) -> 'PhaseRing':
        if m < self.m:
            raise ValueError(f'cannot lift precision {self.m} down to {m}')
        return PhaseRing(self.p, m)

    def join(self, other: 'PhaseRing') -> 'PhaseRing':
        if self.p != other.p:
            raise RingMismatchError(f'cannot combine p={self.p} with p={other.p}')
        return self if self.m >= other.m else other

    def exponent(self, turn) -> int:
        """Exponent representing ``turn`` (a fraction of a full rotation)."""
        value = turn * self.modulus
        if getattr(value, 'denominator', 1) != 1:
            raise ValueError(f'{turn} of a turn is not expressible with modulus {self.modulus}')
        return int(value) % self.modulus


def _reduce_exponent(p: int, e: int) -> int:
    return 1 if p == 2 else ((e - 1) % (p - 1)) + 1


def _normalize_monomial(p: int, mono: Iterable) -> Monomial:
    exps: Dict[int, int] = {}
    for item in mono:
        var, e = (item, 1) if isinstance(item, (int, np.integer)) else item
        if e:
            exps[int(var)] = exps.get(int(var), 0) + int(e)
    return tuple(sorted((v, _reduce_exponent(p, e)) for v, e in exps.items()))


def _monomial_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def _term_key(term):
    mono = term[0]
    return (_monomial_degree(mono), mono)


def _nu2(c: int) -> int:
    return (c & -c).bit_length() - 1


@dataclass(frozen=True)
class PhasePolynomial:
    """Canonical sparse polynomial with coefficients in the phase ring."""

    ring: PhaseRing
    terms: Tuple[Tuple[Monomial, int], ...] = ()

    @classmethod
    def from_terms(cls, ring: PhaseRing, terms: Iterable) -> 'PhasePolynomial':
        acc: Dict[Monomial, int] = {}
        for mono, coef in terms:
            key = _normalize_monomial(ring.p, mono)
            acc[key] = (acc.get(key, 0) + int(coef)) % ring.modulus
        kept = [(k, c) for k, c in acc.items() if c]
        return cls(ring, tuple(sorted(kept, key=_term_key)))

    @classmethod
    def zero(cls, ring: PhaseRing) -> 'PhasePolynomial':
        return cls(ring)

    @classmethod
    def constant(cls, ring: PhaseRing, value: int) -> 'PhasePolynomial':
        return cls.from_terms(ring, [((), value)])

    @classmethod
    def variable(cls, ring: PhaseRing, var: int, coef: int = 1) -> 'PhasePolynomial':
        return cls.from_terms(ring, [(((var, 1),), coef)])

    @classmethod
    def from_values(cls, ring: PhaseRing, n: int,
                    values: Union[np.ndarray, Callable[[Tuple[int, ...]], int]]) -> 'PhasePolynomial':
        """Interpolate the unique reduced polynomial with the given value table.

        Args:
            ring: Phase ring of the result
            n: Number of slot variables
            values: Array of shape (p,)*n indexed by the point, or a callable

        Returns:
            Polynomial f with f(x) == values[x] for every x in Z_p^n
        """
        p, mod = ring.p, ring.modulus
        if callable(values):
            table = np.zeros((p,) * n, dtype=np.int64)
            for point in itertools.product(range(p), repeat=n):
                table[point] = values(point) % mod
        else:
            table = np.asarray(values, dtype=np.int64).reshape((p,) * n) % mod
        if n == 0:
            return cls.constant(ring, int(table))
        if p == 2:
            coeffs = table.copy()
            for axis in range(n):
                hi = [slice(None)] * n
                lo = [slice(None)] * n
                hi[axis], lo[axis] = 1, 0
                coeffs[tuple(hi)] = (coeffs[tuple(hi)] - coeffs[tuple(lo)]) % mod
        else:
            GF = galois.GF(p)
            vandermonde = GF([[pow(a, e, p) if (a or e) else 1 for e in range(p)] for a in range(p)])
            inv = np.linalg.inv(vandermonde)
            coeffs = GF(table)
            for axis in range(n):
                moved = np.moveaxis(coeffs, axis, 0)
                shape = moved.shape
                moved = (inv @ moved.reshape(p, -1)).reshape(shape)
                coeffs = np.moveaxis(moved, 0, axis)
            coeffs = np.asarray(coeffs, dtype=np.int64)
        terms = []
        for point in np.ndindex(coeffs.shape):
            c = int(coeffs[point])
            if c:
                terms.append((tuple((v, e) for v, e in enumerate(point) if e), c))
        return cls.from_terms(ring, terms)

    # -- structure -------------------------------------------------------
    @property
    def constant_term(self) -> int:
        for mono, coef in self.terms:
            if not mono:
                return coef
        return 0

    def without_constant(self) -> 'PhasePolynomial':
        return PhasePolynomial(self.ring, tuple(t for t in self.terms if t[0]))

    def is_constant(self) -> bool:
        return all(not mono for mono, _ in self.terms)

    def variables(self) -> Tuple[int, ...]:
        return tuple(sorted({v for mono, _ in self.terms for v, _ in mono}))

    def degree(self) -> int:
        return max((_monomial_degree(mono) for mono, _ in self.terms), default=0)

    def lift(self, m: int) -> 'PhasePolynomial':
        if m == self.ring.m:
            return self
        target = self.ring.lift(m)
        factor = target.modulus // self.ring.modulus
        return PhasePolynomial(target, tuple((mono, c * factor) for mono, c in self.terms))

    def restrict(self, slots: Iterable[int]) -> 'PhasePolynomial':
        allowed = set(slots)
        return PhasePolynomial(self.ring, tuple(
            (mono, c) for mono, c in self.terms if all(v in allowed for v, _ in mono)))

    # -- arithmetic ------------------------------------------------------
    def _aligned(self, other: 'PhasePolynomial'):
        ring = self.ring.join(other.ring)
        return self.lift(ring.m), other.lift(ring.m), ring

    def __add__(self, other: 'PhasePolynomial') -> 'PhasePolynomial':
        a, b, ring = self._aligned(other)
        return PhasePolynomial.from_terms(ring, a.terms + b.terms)

    def __neg__(self) -> 'PhasePolynomial':
        return PhasePolynomial(self.ring, tuple((mono, (-c) % self.ring.modulus) for mono, c in self.terms))

    def __sub__(self, other: 'PhasePolynomial') -> 'PhasePolynomial':
        return self + (-other)

    def scale(self, k: int) -> 'PhasePolynomial':
        return PhasePolynomial.from_terms(self.ring, ((mono, c * k) for mono, c in self.terms))

    def __mul__(self, other: 'PhasePolynomial') -> 'PhasePolynomial':
        # Pointwise product of integer-valued functions; used for substitution,
        # so no precision alignment happens here.
        if self.ring != other.ring:
            raise RingMismatchError('polynomial product needs identical rings')
        return PhasePolynomial.from_terms(self.ring, (
            (ma + mb, ca * cb) for (ma, ca) in self.terms for (mb, cb) in other.terms))

    def evaluate(self, point: Sequence[int]) -> int:
        total = 0
        for mono, coef in self.terms:
            value = coef
            for var, e in mono:
                x = point[var] if var < len(point) else 0
                value *= pow(int(x) % self.ring.p, e)
                if not value:
                    break
            total += value
        return total % self.ring.modulus

    def value_table(self, n: int) -> np.ndarray:
        p = self.ring.p
        table = np.zeros((p,) * n, dtype=np.int64)
        for point in itertools.product(range(p), repeat=n):
            table[point] = self.evaluate(point)
        return table

    def _affine_image(self, support: Dict[int, int], shift: int) -> 'PhasePolynomial':
        ring = self.ring
        if ring.p != 2:
            terms = [(((j, 1),), c) for j, c in support.items()]
            terms.append(((), shift))
            return PhasePolynomial.from_terms(ring, terms)
        # XOR of the support as an integer polynomial on {0,1} values.
        variables = sorted(support)
        terms = []
        for size in range(1, min(len(variables), ring.m) + 1):
            weight = (-2) ** (size - 1)
            for subset in itertools.combinations(variables, size):
                terms.append((subset, weight))
        xor = PhasePolynomial.from_terms(ring, terms)
        if shift:
            return PhasePolynomial.constant(ring, 1) - xor
        return xor

    def substitute_affine(self, linear: Optional[Matrix], shift: Sequence[int]) -> 'PhasePolynomial':
        """Return g with g(x) = f(B x + b)."""
        if not self.terms:
            return self
        p = self.ring.p
        images: Dict[int, PhasePolynomial] = {}

        def image(var: int) -> 'PhasePolynomial':
            if var not in images:
                if linear is not None and var < len(linear):
                    support = {j: c % p for j, c in enumerate(linear[var]) if c % p}
                else:
                    support = {var: 1}
                b = shift[var] % p if var < len(shift) else 0
                images[var] = self._affine_image(support, b)
            return images[var]

        pieces = []
        for mono, coef in self.terms:
            term = PhasePolynomial.constant(self.ring, coef)
            for var, e in mono:
                for _ in range(e):
                    term = term * image(var)
            pieces.extend(term.terms)
        return PhasePolynomial.from_terms(self.ring, pieces)


def _identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _pad_matrix(mat: Optional[Matrix], n: int) -> Optional[Matrix]:
    if mat is None:
        return None
    size = len(mat)
    return tuple(
        tuple(mat[i][j] if i < size and j < size else int(i == j) for j in range(n))
        for i in range(n))


def _matmul(a: Matrix, b: Matrix, p: int) -> Matrix:
    prod = (np.array(a, dtype=np.int64) @ np.array(b, dtype=np.int64)) % p
    return tuple(tuple(int(v) for v in row) for row in prod)


def _matvec(a: Matrix, v: Sequence[int], p: int) -> Tuple[int, ...]:
    out = (np.array(a, dtype=np.int64) @ np.array(v, dtype=np.int64)) % p
    return tuple(int(x) for x in out)


def matrix_inverse(a: Matrix, p: int) -> Matrix:
    GF = galois.GF(p)
    inv = np.linalg.inv(GF(np.array(a, dtype=np.int64) % p))
    return tuple(tuple(int(v) for v in row) for row in np.asarray(inv, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class HierarchyOperator:
    """U|x> = w^{f(x)} |A x + a>  (linear=None means A = I)."""

    ring: PhaseRing
    x_part: Tuple[int, ...]
    phase_poly: PhasePolynomial
    linear: Optional[Matrix] = None

    def __post_init__(self):
        p = self.ring.p
        object.__setattr__(self, 'x_part', tuple(int(v) % p for v in self.x_part))
        if self.phase_poly.ring != self.ring:
            object.__setattr__(self, 'phase_poly', self.phase_poly.lift(self.ring.m))
        if self.linear is not None:
            lin = tuple(tuple(int(v) % p for v in row) for row in self.linear)
            object.__setattr__(self, 'linear', None if lin == _identity(len(lin)) else lin)

    # -- constructors ----------------------------------------------------
    @classmethod
    def identity(cls, ring: PhaseRing, n: int = 0) -> 'HierarchyOperator':
        return cls(ring, (0,) * n, PhasePolynomial.zero(ring))

    @classmethod
    def phase(cls, ring: PhaseRing, exponent: int, n: int = 0) -> 'HierarchyOperator':
        return cls(ring, (0,) * n, PhasePolynomial.constant(ring, exponent))

    @classmethod
    def diagonal(cls, poly: PhasePolynomial, n: Optional[int] = None) -> 'HierarchyOperator':
        size = max([n or 0] + [v + 1 for v in poly.variables()])
        return cls(poly.ring, (0,) * size, poly)

    @classmethod
    def pauli_x(cls, ring: PhaseRing, slot: int, power: int = 1, n: Optional[int] = None) -> 'HierarchyOperator':
        size = max(n or 0, slot + 1)
        x = [0] * size
        x[slot] = power
        return cls(ring, tuple(x), PhasePolynomial.zero(ring))

    @classmethod
    def pauli_z(cls, ring: PhaseRing, slot: int, power: int = 1, n: Optional[int] = None) -> 'HierarchyOperator':
        poly = PhasePolynomial.variable(ring, slot, ring.pauli_unit * power)
        return cls.diagonal(poly, n)

    @classmethod
    def controlled_z(cls, ring: PhaseRing, slots: Sequence[int], power: int = 1,
                     n: Optional[int] = None) -> 'HierarchyOperator':
        poly = PhasePolynomial.from_terms(ring, [(tuple(slots), ring.pauli_unit * power)])
        return cls.diagonal(poly, n)

    @classmethod
    def r_gate(cls, ring: PhaseRing, slot: int, k: int, power: int = 1,
               n: Optional[int] = None) -> 'HierarchyOperator':
        """R_k = diag(1, exp(2 pi i / 2^k)); lifts the ring when needed."""
        if ring.p != 2:
            raise ValueError('R_k gates are qubit gates')
        ring = ring.lift(max(ring.m, k))
        poly = PhasePolynomial.variable(ring, slot, (ring.modulus >> k) * power)
        return cls.diagonal(poly, n)

    @classmethod
    def linear_map(cls, ring: PhaseRing, matrix: Sequence[Sequence[int]]) -> 'HierarchyOperator':
        size = len(matrix)
        return cls(ring, (0,) * size, PhasePolynomial.zero(ring), tuple(tuple(r) for r in matrix))

    @classmethod
    def cnot(cls, ring: PhaseRing, control: int, target: int, n: Optional[int] = None) -> 'HierarchyOperator':
        size = max(n or 0, control + 1, target + 1)
        mat = [list(row) for row in _identity(size)]
        mat[target][control] = 1
        return cls.linear_map(ring, mat)

    @classmethod
    def swap(cls, ring: PhaseRing, a: int, b: int, n: Optional[int] = None) -> 'HierarchyOperator':
        size = max(n or 0, a + 1, b + 1)
        mat = [list(row) for row in _identity(size)]
        mat[a][a] = mat[b][b] = 0
        mat[a][b] = mat[b][a] = 1
        return cls.linear_map(ring, mat)

    # -- shape -----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.x_part)

    @property
    def p(self) -> int:
        return self.ring.p

    def lifted(self, m: int) -> 'HierarchyOperator':
        if m == self.ring.m:
            return self
        return HierarchyOperator(self.ring.lift(m), self.x_part, self.phase_poly.lift(m), self.linear)

    def padded(self, n: int) -> 'HierarchyOperator':
        if n <= self.n:
            return self
        return HierarchyOperator(self.ring, self.x_part + (0,) * (n - self.n), self.phase_poly,
                                 _pad_matrix(self.linear, n))

    def _matrix(self) -> Matrix:
        return self.linear if self.linear is not None else _identity(self.n)

    def is_diagonal(self) -> bool:
        return self.linear is None and not any(self.x_part)

    def support(self) -> Tuple[int, ...]:
        slots = {i for i, v in enumerate(self.x_part) if v}
        slots.update(self.phase_poly.variables())
        if self.linear is not None:
            for i, row in enumerate(self.linear):
                if any(v != int(i == j) for j, v in enumerate(row)):
                    slots.add(i)
                    slots.update(j for j, v in enumerate(row) if v and j != i)
        return tuple(sorted(slots))

    def restrict(self, slots: Iterable[int]) -> 'HierarchyOperator':
        """Drop every diagonal term touching a slot outside ``slots``."""
        if not self.is_diagonal():
            raise ValueError('only diagonal operators can be restricted')
        return HierarchyOperator(self.ring, self.x_part, self.phase_poly.restrict(slots))

    # -- canonical key ---------------------------------------------------
    def _key(self):
        p, m = self.ring.p, self.ring.m
        terms = self.phase_poly.terms
        shift = 0
        if p == 2:
            while shift < m - 1 and all(c % (1 << (shift + 1)) == 0 for _, c in terms):
                shift += 1
        reduced = tuple((mono, c >> shift) for mono, c in terms)
        used = set(self.phase_poly.variables())
        n = self.n
        lin = self._matrix()
        while n > 0:
            i = n - 1
            trivial_lin = all(lin[i][j] == int(i == j) and lin[j][i] == int(i == j) for j in range(self.n))
            if self.x_part[i] or i in used or not trivial_lin:
                break
            n -= 1
        lin_key = None
        if self.linear is not None:
            lin_key = tuple(row[:n] for row in self.linear[:n])
        return (p, m - shift, self.x_part[:n], lin_key, reduced)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HierarchyOperator):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    # -- algebra ---------------------------------------------------------
    def __mul__(self, other: 'HierarchyOperator') -> 'HierarchyOperator':
        return multiply(self, other)

    def __pow__(self, k: int) -> 'HierarchyOperator':
        base = self if k >= 0 else inverse(self)
        result = HierarchyOperator.identity(self.ring, self.n)
        for _ in range(abs(k)):
            result = multiply(result, base)
        return result

    def dagger(self) -> 'HierarchyOperator':
        return inverse(self)

    def apply(self, point: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
        """Action on a basis state: (phase exponent, image point)."""
        point = tuple(point) + (0,) * (self.n - len(point))
        phase = self.phase_poly.evaluate(point)
        image = _matvec(self._matrix(), point, self.p) if self.n else ()
        image = tuple((v + a) % self.p for v, a in zip(image, self.x_part))
        return phase, image

    def to_text(self, slot_names: Optional[Sequence[str]] = None) -> str:
        return render(self, slot_names)

    @classmethod
    def parse(cls, text: str, ring: PhaseRing, n: Optional[int] = None) -> 'HierarchyOperator':
        return parse_operator(text, ring, n)

    def __repr__(self) -> str:
        return f'HierarchyOperator({self.to_text()!r}, p={self.p}, m={self.ring.m})'


def _align(u: HierarchyOperator, v: HierarchyOperator):
    ring = u.ring.join(v.ring)
    n = max(u.n, v.n)
    return u.lifted(ring.m).padded(n), v.lifted(ring.m).padded(n), ring


def multiply(u: HierarchyOperator, v: HierarchyOperator) -> HierarchyOperator:
    """UV = (a + A b, A B, f(B x + b) + g) for U = (a, A, f), V = (b, B, g)."""
    u, v, ring = _align(u, v)
    p = ring.p
    if u.n == 0:
        return HierarchyOperator(ring, (), u.phase_poly + v.phase_poly)
    shifted = _matvec(u._matrix(), v.x_part, p)
    x = tuple((a + b) % p for a, b in zip(u.x_part, shifted))
    linear = None
    if u.linear is not None or v.linear is not None:
        linear = _matmul(u._matrix(), v._matrix(), p)
    poly = u.phase_poly.substitute_affine(v.linear, v.x_part) + v.phase_poly
    return HierarchyOperator(ring, x, poly, linear)


def inverse(u: HierarchyOperator) -> HierarchyOperator:
    """(a, A, f)^-1 = (-A^-1 a, A^-1, -f(A^-1 y - A^-1 a))."""
    p = u.p
    if u.linear is None:
        inv_lin = None
        back = tuple((-a) % p for a in u.x_part)
    else:
        inv_lin = matrix_inverse(u.linear, p)
        back = tuple((-v) % p for v in _matvec(inv_lin, u.x_part, p))
    poly = -u.phase_poly.substitute_affine(inv_lin, back)
    return HierarchyOperator(u.ring, back, poly, inv_lin)


def group_commutator(u: HierarchyOperator, v: HierarchyOperator) -> HierarchyOperator:
    """K(U, V) = U V U^dag V^dag."""
    return multiply(multiply(u, v), multiply(inverse(u), inverse(v)))


def square(u: HierarchyOperator) -> HierarchyOperator:
    return multiply(u, u)


def conjugate(u: HierarchyOperator, v: HierarchyOperator) -> HierarchyOperator:
    """U V U^dag."""
    return multiply(multiply(u, v), inverse(u))


def is_phase(u: HierarchyOperator) -> Optional[int]:
    """Constant phase exponent of ``u`` in its own ring, or None."""
    if any(u.x_part) or u.linear is not None or not u.phase_poly.is_constant():
        return None
    return u.phase_poly.constant_term


def phase_turn(u: HierarchyOperator):
    """Phase of a pure-phase operator as a fraction of a turn."""
    exponent = is_phase(u)
    return None if exponent is None else Fraction(exponent, u.ring.modulus)


def strip_phase(u: HierarchyOperator) -> HierarchyOperator:
    return HierarchyOperator(u.ring, u.x_part, u.phase_poly.without_constant(), u.linear)


def equal_up_to_phase(u: HierarchyOperator, v: HierarchyOperator) -> bool:
    return strip_phase(u) == strip_phase(v)


def hierarchy_level(u: HierarchyOperator) -> int:
    """Smallest k with U in the k-th level of the Clifford hierarchy."""
    level = 1
    if u.linear is not None:
        level = 2
    m = u.ring.m
    for mono, coef in u.phase_poly.terms:
        if not mono:
            continue
        if u.p == 2:
            term_level = len(mono) + (m - _nu2(coef)) - 1
        else:
            term_level = _monomial_degree(mono)
        level = max(level, term_level)
    return level


def pauli_vector(u: HierarchyOperator) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """(x | z) exponents when ``u`` is a Pauli up to phase, else None."""
    if u.linear is not None or u.phase_poly.degree() > 1:
        return None
    unit = u.ring.pauli_unit
    z = [0] * u.n
    for mono, coef in u.phase_poly.terms:
        if not mono:
            continue
        if coef % unit:
            return None
        z[mono[0][0]] = (coef // unit) % u.p
    return tuple(u.x_part), tuple(z)


def pauli_from_vector(ring: PhaseRing, x: Sequence[int], z: Sequence[int]) -> HierarchyOperator:
    """X^x Z^z (X part first, diagonal second, as in U = X^a D_f)."""
    n = len(x)
    poly = PhasePolynomial.from_terms(ring, [(((i, 1),), ring.pauli_unit * c) for i, c in enumerate(z) if c])
    return HierarchyOperator(ring, tuple(x), poly).padded(n)


def symplectic_action(u: HierarchyOperator, n: Optional[int] = None) -> np.ndarray:
    """Rows are the (x|z) images of X_1..X_n then Z_1..Z_n under conjugation."""
    n = max(n or 0, u.n)
    rows = []
    for species in ('x', 'z'):
        for i in range(n):
            pauli = (HierarchyOperator.pauli_x(u.ring, i, n=n) if species == 'x'
                     else HierarchyOperator.pauli_z(u.ring, i, n=n))
            vec = pauli_vector(conjugate(u, pauli).padded(n))
            if vec is None:
                raise ValueError(f'{u.to_text()} is not a Clifford operator')
            rows.append(list(vec[0]) + list(vec[1]))
    return np.array(rows, dtype=np.int64)


# -- canonical text ------------------------------------------------------

def _slots(indices: Sequence[int], names: Optional[Sequence[str]], single: bool = False) -> str:
    if names is not None:
        return '[' + ','.join(names[i] for i in indices) + ']'
    if single:
        return str(indices[0] + 1)
    return '{' + ','.join(str(i + 1) for i in indices) + '}'


def _power(k: int) -> str:
    return '' if k == 1 else f'^{k}'


def _render_linear(mat: Matrix, names) -> str:
    n = len(mat)
    off = [(i, j) for i in range(n) for j in range(n) if mat[i][j] != int(i == j)]
    if len(off) == 1:
        t, c = off[0]
        if mat[t][c] == 1:
            return f'CNOT{_slots([c, t], names)}'
    if len(off) == 4:
        (a, _), (b, _) = off[0], off[-1]
        if a != b and mat[a][b] == mat[b][a] == 1 and mat[a][a] == mat[b][b] == 0:
            return f'SWAP{_slots([a, b], names)}'
    return 'L[' + ';'.join(','.join(str(v) for v in row) for row in mat) + ']'


def _render_term(ring: PhaseRing, mono: Monomial, coef: int, names) -> str:
    variables = [v for v, _ in mono]
    if ring.p == 2:
        t = len(mono)
        k = ring.m - _nu2(coef)
        unit = (coef >> (ring.m - k)) % (1 << k)
        if t == 1:
            if k == 1:
                return f'Z{_slots(variables, names, single=True)}'
            return f'R{k}{_slots(variables, names)}{_power(unit)}'
        if k == 1:
            head = {2: 'CZ', 3: 'CCZ'}.get(t, f'C{t - 1}Z')
            return f'{head}{_slots(variables, names)}'
    else:
        exps = [e for _, e in mono]
        if len(mono) == 1 and exps[0] == 1:
            return f'Z{_slots(variables, names, single=True)}{_power(coef)}'
        if len(mono) == 2 and exps == [1, 1]:
            return f'CZ{_slots(variables, names)}{_power(coef)}'
    parts = []
    for v, e in mono:
        ref = names[v] if names is not None else str(v + 1)
        parts.append(ref if e == 1 else f'{ref}^{e}')
    return f'D[{coef}]{{{",".join(parts)}}}'


def render(u: HierarchyOperator, slot_names: Optional[Sequence[str]] = None) -> str:
    """Canonical text: phase, then X part, then linear part, then diagonal terms."""
    tokens: List[str] = []
    const = u.phase_poly.constant_term
    if const:
        tokens.append(f'w^{const}')
    for i, a in enumerate(u.x_part):
        if a:
            tokens.append(f'X{_slots([i], slot_names, single=True)}{_power(a)}')
    if u.linear is not None:
        tokens.append(_render_linear(u.linear, slot_names))
    for mono, coef in u.phase_poly.terms:
        if mono:
            tokens.append(_render_term(u.ring, mono, coef, slot_names))
    return '*'.join(tokens) if tokens else 'I'


_TOKEN_PATTERNS = [
    ('phase', re.compile(r'^w\^(-?\d+)$')),
    ('identity', re.compile(r'^I$')),
    ('cnot', re.compile(r'^CNOT\{(\d+),(\d+)\}$')),
    ('swap', re.compile(r'^SWAP\{(\d+),(\d+)\}$')),
    ('linear', re.compile(r'^L\[([\d,;\s]+)\]$')),
    ('x', re.compile(r'^X(\d+)(?:\^(\d+))?$')),
    ('z', re.compile(r'^Z(\d+)(?:\^(\d+))?$')),
    ('cz', re.compile(r'^(CZ|CCZ|C(\d+)Z)\{([\d,]+)\}(?:\^(\d+))?$')),
    ('r', re.compile(r'^R(\d+)\{(\d+)\}(?:\^(\d+))?$')),
    ('generic', re.compile(r'^D\[(-?\d+)\]\{([\d^,]+)\}$')),
]


def _token_operator(token: str, ring: PhaseRing) -> HierarchyOperator:
    for kind, pattern in _TOKEN_PATTERNS:
        match = pattern.match(token)
        if not match:
            continue
        g = match.groups()
        if kind == 'phase':
            return HierarchyOperator.phase(ring, int(g[0]))
        if kind == 'identity':
            return HierarchyOperator.identity(ring)
        if kind == 'cnot':
            return HierarchyOperator.cnot(ring, int(g[0]) - 1, int(g[1]) - 1)
        if kind == 'swap':
            return HierarchyOperator.swap(ring, int(g[0]) - 1, int(g[1]) - 1)
        if kind == 'linear':
            rows = [[int(v) for v in row.split(',')] for row in g[0].replace(' ', '').split(';')]
            if any(len(r) != len(rows) for r in rows):
                raise OperatorParseError(f'linear part {token!r} is not square')
            return HierarchyOperator.linear_map(ring, rows)
        if kind == 'x':
            return HierarchyOperator.pauli_x(ring, int(g[0]) - 1, int(g[1] or 1))
        if kind == 'z':
            return HierarchyOperator.pauli_z(ring, int(g[0]) - 1, int(g[1] or 1))
        if kind == 'cz':
            slots = [int(s) - 1 for s in g[2].split(',')]
            expected = {'CZ': 2, 'CCZ': 3}.get(g[0], int(g[1] or 0) + 1)
            if len(slots) != expected:
                raise OperatorParseError(f'{token!r} needs {expected} slots')
            return HierarchyOperator.controlled_z(ring, slots, int(g[3] or 1))
        if kind == 'r':
            return HierarchyOperator.r_gate(ring, int(g[1]) - 1, int(g[0]), int(g[2] or 1))
        if kind == 'generic':
            mono = []
            for part in g[1].split(','):
                var, _, e = part.partition('^')
                mono.append((int(var) - 1, int(e or 1)))
            poly = PhasePolynomial.from_terms(ring, [(mono, int(g[0]))])
            return HierarchyOperator.diagonal(poly)
    raise OperatorParseError(f'unrecognised operator token {token!r}')


def parse_operator(text: str, ring: PhaseRing, n: Optional[int] = None) -> HierarchyOperator:
    """Parse the canonical grammar; factors are multiplied left to right."""
    text = text.strip()
    if not text:
        raise OperatorParseError('empty operator text')
    result = HierarchyOperator.identity(ring, n or 0)
    for token in text.split('*'):
        try:
            result = multiply(result, _token_operator(token.strip(), ring))
        except ValueError as exc:
            raise OperatorParseError(f'{token!r}: {exc}') from exc
    return result.padded(n or 0)


if __name__ == '__main__':
    ring = PhaseRing(2, 3)
    x1 = HierarchyOperator.pauli_x(ring, 0, n=2)
    cz = HierarchyOperator.controlled_z(ring, [0, 1])
    print('K(CZ, X1) =', group_commutator(cz, x1).to_text())
    print('R3^2 =', square(HierarchyOperator.r_gate(ring, 0, 3)).to_text())
