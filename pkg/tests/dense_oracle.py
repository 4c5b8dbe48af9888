"""
Dense-matrix oracle for phase-algebra operators.

Builds U|x> = w^{f(x)} |A x + a> as a complex matrix straight from the
operator's parts, so products, inverses and commutators can be checked
against numpy instead of the sparse algebra.
"""

import itertools
from typing import Optional, Tuple

import numpy as np

from phase_algebra import HierarchyOperator


def basis(p: int, n: int):
    return list(itertools.product(range(p), repeat=n))


def _index(point: Tuple[int, ...], p: int) -> int:
    idx = 0
    for v in point:
        idx = idx * p + v
    return idx


def dense(u: HierarchyOperator, n: Optional[int] = None) -> np.ndarray:
    n = max(n or 0, u.n)
    u = u.padded(n)
    p, mod = u.p, u.ring.modulus
    size = p ** n
    mat = np.zeros((size, size), dtype=np.complex128)
    for point in basis(p, n):
        exponent, image = u.apply(point)
        mat[_index(image, p), _index(point, p)] = np.exp(2j * np.pi * exponent / mod)
    return mat


def phase_exponent(mat: np.ndarray, modulus: int, tol: float = 1e-9) -> Optional[int]:
    """k with mat = exp(2 pi i k / modulus) * I, or None when mat is not a phase."""
    size = mat.shape[0]
    value = mat[0, 0]
    if abs(abs(value) - 1) > tol or not np.allclose(mat, value * np.eye(size), atol=tol):
        return None
    k = np.angle(value) / (2 * np.pi) * modulus
    rounded = int(round(k)) % modulus
    if abs(k - round(k)) > 1e-6:
        return None
    return rounded


def same_operator(u: HierarchyOperator, v: HierarchyOperator, tol: float = 1e-9) -> bool:
    n = max(u.n, v.n)
    return bool(np.allclose(dense(u, n), dense(v, n), atol=tol))
