import pytest
from fractions import Fraction

import numpy as np

from errors import OperatorParseError, RingMismatchError
from phase_algebra import (
    HierarchyOperator, PhasePolynomial, PhaseRing, conjugate, equal_up_to_phase, group_commutator,
    hierarchy_level, inverse, is_phase, multiply, parse_operator, pauli_from_vector, pauli_vector, phase_turn,
    render, square, strip_phase, symplectic_action,
)
from tests.dense_oracle import dense, phase_exponent, same_operator


def _random_operator(rng, ring, n, depth=5):
    op = HierarchyOperator.identity(ring, n)
    for _ in range(depth):
        kind = int(rng.integers(6))
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        if kind == 0:
            step = HierarchyOperator.pauli_x(ring, a, n=n)
        elif kind == 1:
            step = HierarchyOperator.pauli_z(ring, a, n=n)
        elif kind == 2:
            step = HierarchyOperator.controlled_z(ring, [a, b], n=n)
        elif kind == 3 and ring.p == 2:
            step = HierarchyOperator.r_gate(ring, a, int(rng.integers(1, ring.m + 1)), n=n)
        elif kind == 4:
            step = HierarchyOperator.cnot(ring, a, b, n=n)
        else:
            step = HierarchyOperator.swap(ring, a, b, n=n)
        op = multiply(op, step)
    return op


def test_cz_commutator_with_x_is_z(ring2):
    """Test K(CZ, X1) is Z2 up to phase"""
    cz = HierarchyOperator.controlled_z(ring2, [0, 1])
    x1 = HierarchyOperator.pauli_x(ring2, 0, n=2)
    k = group_commutator(cz, x1)
    assert equal_up_to_phase(k, HierarchyOperator.pauli_z(ring2, 1, n=2))
    assert render(strip_phase(k)) == "Z2"


def test_r_gate_squares(ring2):
    """Test R3^2 = R2 and R2^2 = Z exactly"""
    r3 = HierarchyOperator.r_gate(ring2, 0, 3)
    r2 = HierarchyOperator.r_gate(ring2, 0, 2)
    assert square(r3) == r2
    assert square(r2) == HierarchyOperator.pauli_z(ring2, 0)


def test_hierarchy_levels(ring2):
    """Test hierarchy levels of the named gates"""
    assert hierarchy_level(HierarchyOperator.pauli_x(ring2, 0)) == 1
    assert hierarchy_level(HierarchyOperator.pauli_z(ring2, 0)) == 1
    assert hierarchy_level(HierarchyOperator.controlled_z(ring2, [0, 1])) == 2
    assert hierarchy_level(HierarchyOperator.cnot(ring2, 0, 1)) == 2
    assert hierarchy_level(HierarchyOperator.controlled_z(ring2, [0, 1, 2])) == 3
    assert hierarchy_level(HierarchyOperator.r_gate(ring2, 0, 3)) == 3
    assert hierarchy_level(HierarchyOperator.r_gate(PhaseRing(2, 4), 0, 4)) == 4


def test_x_z_commutator_phase(ring2, ring3):
    """Test K(X, Z) is the primitive p-th root of unity"""
    for ring in (ring2, ring3):
        x = HierarchyOperator.pauli_x(ring, 0)
        z = HierarchyOperator.pauli_z(ring, 0)
        turn = phase_turn(group_commutator(x, z))
        assert turn is not None
        assert turn in (Fraction(1, ring.p), Fraction(ring.p - 1, ring.p))


def test_fermion_exchange(ring2):
    """Test (XZ)^2 = -1 for qubits"""
    xz = multiply(HierarchyOperator.pauli_x(ring2, 0), HierarchyOperator.pauli_z(ring2, 0))
    assert phase_turn(square(xz)) == Fraction(1, 2)


def test_parse_and_render(ring2):
    """Test the canonical text grammar"""
    op = parse_operator("CZ{1,2}*X3", ring2, 3)
    expected = multiply(HierarchyOperator.controlled_z(ring2, [0, 1], n=3),
                        HierarchyOperator.pauli_x(ring2, 2, n=3))
    assert op == expected
    assert parse_operator(render(op), ring2, 3) == op
    assert render(HierarchyOperator.controlled_z(ring2, [0, 1, 2])) == "CCZ{1,2,3}"
    assert render(HierarchyOperator.r_gate(ring2, 0, 3)) == "R3{1}"
    assert render(HierarchyOperator.swap(ring2, 0, 1)) == "SWAP{1,2}"
    assert render(HierarchyOperator.cnot(ring2, 0, 1)) == "CNOT{1,2}"
    assert render(HierarchyOperator.identity(ring2, 2)) == "I"


def test_parse_errors(ring2):
    """Test malformed operator text is rejected"""
    with pytest.raises(OperatorParseError):
        parse_operator("", ring2)
    with pytest.raises(OperatorParseError):
        parse_operator("CZ{1,2,3}", ring2)
    with pytest.raises(OperatorParseError):
        parse_operator("Y1", ring2)


def test_ring_mismatch(ring2, ring3):
    """Test operators over different primes cannot be combined"""
    with pytest.raises(RingMismatchError):
        multiply(HierarchyOperator.pauli_x(ring2, 0), HierarchyOperator.pauli_x(ring3, 0))


def test_named_slot_rendering(ring2):
    """Test slot names replace indices in rendered text"""
    cz = HierarchyOperator.controlled_z(ring2, [0, 1])
    assert render(cz, ["(1,{1})", "(2,{2})"]) == "CZ[(1,{1}),(2,{2})]"


def test_pauli_vector_round_trip(ring3):
    """Test Pauli vectors recover X^x Z^z"""
    op = pauli_from_vector(ring3, (1, 0, 2), (0, 2, 1))
    assert pauli_vector(op) == ((1, 0, 2), (0, 2, 1))
    assert pauli_vector(HierarchyOperator.controlled_z(ring3, [0, 1])) is None


def test_symplectic_action_of_cnot(ring2):
    """Test CNOT spreads X forward and Z backward"""
    mat = symplectic_action(HierarchyOperator.cnot(ring2, 0, 1))
    expected = np.array([
        [1, 1, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 1, 1],
    ])
    assert np.array_equal(mat % 2, expected)


def test_restrict_drops_outside_terms(ring2):
    """Test restriction keeps only terms inside the slot set"""
    op = multiply(HierarchyOperator.controlled_z(ring2, [0, 1], n=3),
                  HierarchyOperator.controlled_z(ring2, [1, 2], n=3))
    assert op.restrict([0, 1]) == HierarchyOperator.controlled_z(ring2, [0, 1], n=3)
    with pytest.raises(ValueError):
        HierarchyOperator.pauli_x(ring2, 0).restrict([0])


def test_from_values_interpolation(ring2):
    """Test interpolation recovers a cubic phase polynomial"""
    ccz = HierarchyOperator.controlled_z(ring2, [0, 1, 2])
    table = ccz.phase_poly.value_table(3)
    poly = PhasePolynomial.from_values(ccz.ring, 3, table)
    assert HierarchyOperator.diagonal(poly, 3) == ccz


def test_dense_oracle_agrees_on_products(rng):
    """Test products, inverses and conjugation against dense matrices"""
    for _ in range(60):
        ring = PhaseRing(2, int(rng.integers(1, 4))) if rng.random() < 0.7 else PhaseRing(3, 1)
        n = int(rng.integers(2, 4))
        a = _random_operator(rng, ring, n)
        b = _random_operator(rng, ring, n)
        prod = multiply(a, b)
        assert np.allclose(dense(prod, n), dense(a, n) @ dense(b, n))
        assert np.allclose(dense(inverse(a), n), np.linalg.inv(dense(a, n)))
        assert same_operator(conjugate(a, b), multiply(multiply(a, b), inverse(a)))


@pytest.mark.oracle
def test_square_identity_sampled(rng):
    """Test (AB)^2 = A^2 K(A^dag, B) B^2 on sampled operators"""
    for _ in range(1000):
        ring = PhaseRing(2, int(rng.integers(1, 5))) if rng.random() < 0.75 else PhaseRing(3, 1)
        n = int(rng.integers(2, 5))
        a = _random_operator(rng, ring, n)
        b = _random_operator(rng, ring, n)
        lhs = square(multiply(a, b))
        rhs = multiply(multiply(square(a), group_commutator(inverse(a), b)), square(b))
        assert lhs == rhs


def test_commutator_phase_matches_dense(ring2):
    """Test a phase-valued commutator against the dense oracle"""
    x = HierarchyOperator.pauli_x(ring2, 0)
    z = HierarchyOperator.pauli_z(ring2, 0)
    k = group_commutator(x, z)
    exponent = phase_exponent(dense(k, 1), ring2.modulus)
    assert exponent == k.phase_poly.constant_term


def test_is_phase_detects_constants(ring2):
    """Test pure phases are recognised and anything else is not"""
    x = HierarchyOperator.pauli_x(ring2, 0)
    z = HierarchyOperator.pauli_z(ring2, 0)
    assert is_phase(multiply(x, x)) == 0
    k = group_commutator(x, z)
    assert is_phase(k) == k.ring.modulus // 2
    assert is_phase(z) is None
    assert is_phase(x) is None


def test_substitute_affine_composes_with_the_map():
    """Test g(x) = f(Bx + b) pointwise over every basis state"""
    ring = PhaseRing(2, 2)
    f = PhasePolynomial.variable(ring, 0) + PhasePolynomial.variable(ring, 1, 2)
    g = f.substitute_affine([[1, 1], [0, 1]], [0, 1])
    for x0 in range(2):
        for x1 in range(2):
            image = ((x0 + x1) % 2, (x1 + 1) % 2)
            assert g.evaluate((x0, x1)) % ring.modulus == f.evaluate(image) % ring.modulus


def _x_cz(ring, target, pair, n=3):
    return multiply(HierarchyOperator.pauli_x(ring, target, n=n), HierarchyOperator.controlled_z(ring, pair, n=n))


def test_square_of_product_with_hermitian_factor(ring2):
    """Test (AB)^2 = A^2 K(A, B) B^2 when A is its own inverse"""
    a = _x_cz(ring2, 0, [1, 2])
    assert inverse(a) == a
    for b in (_x_cz(ring2, 1, [0, 2]), _x_cz(ring2, 2, [0, 1]), HierarchyOperator.r_gate(ring2, 1, 3, n=3)):
        lhs = square(multiply(a, b))
        rhs = multiply(multiply(square(a), group_commutator(a, b)), square(b))
        assert lhs == rhs


def test_pauli_commutators_lower_the_level(ring2):
    """Test K(U, P) sits one level below U for every single-qubit Pauli P"""
    gates = [
        HierarchyOperator.controlled_z(ring2, [0, 1], n=3),
        HierarchyOperator.controlled_z(ring2, [0, 1, 2]),
        HierarchyOperator.r_gate(ring2, 0, 3, n=3),
        HierarchyOperator.r_gate(PhaseRing(2, 4), 2, 4, n=3),
        HierarchyOperator.cnot(ring2, 0, 1, n=3),
    ]
    for gate in gates:
        k = hierarchy_level(gate)
        for slot in range(3):
            for pauli in (HierarchyOperator.pauli_x(ring2, slot, n=3), HierarchyOperator.pauli_z(ring2, slot, n=3)):
                assert hierarchy_level(group_commutator(gate, pauli)) <= k - 1


def test_nested_commutators_reach_a_phase(ring2):
    """Test k nested Pauli commutators of a level-k gate leave only a phase"""
    ccz = HierarchyOperator.controlled_z(ring2, [0, 1, 2])
    xs = [HierarchyOperator.pauli_x(ring2, slot, n=3) for slot in range(3)]
    once = group_commutator(ccz, xs[0])
    assert equal_up_to_phase(once, HierarchyOperator.controlled_z(ring2, [1, 2], n=3))
    twice = group_commutator(once, xs[1])
    assert equal_up_to_phase(twice, HierarchyOperator.pauli_z(ring2, 2, n=3))
    assert is_phase(group_commutator(twice, xs[2])) is not None

    r4 = HierarchyOperator.r_gate(PhaseRing(2, 4), 0, 4)
    x = HierarchyOperator.pauli_x(ring2, 0)
    nested = r4
    for _ in range(3):
        nested = group_commutator(nested, x)
        assert is_phase(nested) is None
    assert is_phase(group_commutator(nested, x)) is not None


def test_worked_three_qubit_examples(ring2):
    """Test the X CZ products used by the stacked colour code walls"""
    assert group_commutator(_x_cz(ring2, 1, [2, 0]), _x_cz(ring2, 0, [1, 2])) == HierarchyOperator.identity(ring2, 3)
    assert square(_x_cz(ring2, 0, [1, 2])) == HierarchyOperator.identity(ring2, 3)
    assert square(_x_cz(ring2, 0, [0, 1])) == HierarchyOperator.pauli_z(ring2, 1, n=3)
    zx = multiply(HierarchyOperator.pauli_z(ring2, 0), HierarchyOperator.pauli_x(ring2, 0))
    assert phase_turn(square(zx)) == Fraction(1, 2)
