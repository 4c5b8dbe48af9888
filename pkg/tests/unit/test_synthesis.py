import pytest
import numpy as np

from errors import SynthesisError
from phase_algebra import HierarchyOperator, PhaseRing, equal_up_to_phase, pauli_vector
from synthesis import (
    FourierLayer, GateRecord, LogicalGate, clifford_name, gate_name, group_closure, independent_gates,
    is_generated, synthesize_clifford, synthesize_diagonal, verify_action,
)

RING = PhaseRing(2, 1)

HADAMARD = np.array([[0, 1], [1, 0]])
CZ_MATRIX = np.array([
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
])
CNOT_MATRIX = np.array([
    [1, 1, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 1, 1],
])
H_SWAP_MATRIX = np.array([
    [0, 0, 0, 1],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [1, 0, 0, 0],
])


def test_synthesize_named_cliffords():
    """Test synthesis reproduces and names the standard Cliffords"""
    for matrix, name in ((HADAMARD, "H"), (CZ_MATRIX, "CZ"), (CNOT_MATRIX, "CNOT"), (H_SWAP_MATRIX, "H*SWAP")):
        gate = synthesize_clifford(matrix, RING)
        assert np.array_equal(gate.symplectic_matrix() % 2, matrix)
        assert gate_name(gate) == name


def test_cz_synthesis_is_diagonal():
    """Test CZ comes out as a single diagonal layer"""
    gate = synthesize_clifford(CZ_MATRIX, RING)
    assert gate.is_operator()
    assert equal_up_to_phase(gate.as_operator(), HierarchyOperator.controlled_z(RING, [0, 1]))


def test_qutrit_clifford_synthesis():
    """Test a qutrit multiplier gate is synthesized and verified"""
    ring = PhaseRing(3, 1)
    matrix = np.array([[2, 0], [0, 2]])
    gate = synthesize_clifford(matrix, ring)
    assert np.array_equal(gate.symplectic_matrix() % 3, matrix)
    assert clifford_name(matrix, 3) == "F^2"


def test_diagonal_synthesis_ccz():
    """Test appending CZ23 to X1 integrates to CCZ"""
    ring = PhaseRing(2, 1)
    gate = synthesize_diagonal({0: HierarchyOperator.controlled_z(ring, [1, 2])}, 3, ring)
    assert gate.level() == 3
    assert gate_name(gate) == "CCZ"
    assert equal_up_to_phase(gate.as_operator(), HierarchyOperator.controlled_z(gate.ring, [0, 1, 2]))


def test_diagonal_synthesis_r3():
    """Test appending R2 to X integrates to an R3 power"""
    ring = PhaseRing(2, 2)
    gate = synthesize_diagonal({0: HierarchyOperator.r_gate(ring, 0, 2)}, 1, ring)
    assert gate.level() == 3
    assert gate_name(gate) == "R3"


def test_diagonal_synthesis_rejects_non_diagonal():
    """Test a non-diagonal appendix is refused"""
    with pytest.raises(SynthesisError):
        synthesize_diagonal({0: HierarchyOperator.pauli_x(RING, 1, n=2)}, 2, RING)


def test_verify_action_mismatch():
    """Test verification raises on the wrong action"""
    gate = synthesize_clifford(CZ_MATRIX, RING)
    assert verify_action(gate, CZ_MATRIX)
    with pytest.raises(SynthesisError):
        verify_action(gate, CNOT_MATRIX)


def test_fourier_conjugation_turns_cz_into_cnot():
    """Test H on one slot of CZ gives a CNOT"""
    gate = synthesize_clifford(CZ_MATRIX, RING)
    assert gate_name(gate.conjugated_by_fourier([1])) == "CNOT"
    assert gate.conjugated_by_fourier([]) is gate


def test_fourier_layer_text():
    """Test Fourier layers render as H for qubits and F for qudits"""
    layer = FourierLayer((0, 2), 1)
    assert layer.text(2) == "H{1,3}"
    assert layer.text(3, ["a", "b", "c"]) == "F{a,c}"
    assert layer.inverse(2).power == 1
    assert layer.inverse(3).power == 3


def test_independent_gates_drop_generated():
    """Test R2 is dropped once R3 is present, while H and R2 both stay"""
    ring = PhaseRing(2, 3)
    r3 = LogicalGate.of(HierarchyOperator.r_gate(ring, 0, 3))
    r2 = LogicalGate.of(HierarchyOperator.r_gate(ring, 0, 2))
    h = synthesize_clifford(HADAMARD, PhaseRing(2, 1))
    assert independent_gates([r2, r3]) == [1]
    assert independent_gates([h, synthesize_clifford(np.array([[1, 1], [0, 1]]), PhaseRing(2, 1))]) == [0, 1]
    assert is_generated(LogicalGate.of(HierarchyOperator.pauli_z(ring, 0)), [r2])


def test_independent_gates_prune_earlier_picks():
    """Test CZ is dropped once CNOT and H on its target are both chosen"""
    cz = synthesize_clifford(CZ_MATRIX, RING)
    cnot = cz.conjugated_by_fourier([1])
    h2 = LogicalGate.from_layers(RING, 2, [FourierLayer((1,), 1)])
    assert [gate_name(g) for g in (cnot, cz, h2)] == ["CNOT", "CZ", "H"]
    assert independent_gates([cnot, cz, h2]) == [0, 2]
    assert independent_gates([cnot, cz]) == [0, 1]


def test_group_closure_cap():
    """Test closure gives up at the cap"""
    p = 5
    gen = np.array([[1, 1], [0, 1]])
    full = group_closure([gen], lambda a, b: (a @ b) % p, lambda a: a.tobytes(), 100)
    assert len(full) == 5
    assert group_closure([gen], lambda a, b: (a @ b) % p, lambda a: a.tobytes(), 3) is None


def test_gate_record_to_dict():
    """Test gate records report name, support and slots"""
    gate = synthesize_clifford(CZ_MATRIX, RING)
    record = GateRecord("s2{1,2}", gate, 2, slot_names=("q1", "q2"))
    data = record.to_dict()
    assert data["wall"] == "s2{1,2}"
    assert data["name"] == "CZ"
    assert data["support_dimension"] == 2
    assert data["level"] == 2
    assert data["slots"] == ["q1", "q2"]
    assert "orientation" not in data


def test_conjugate_pauli_through_layers():
    """Test Paulis are pushed through Fourier and diagonal layers"""
    h = synthesize_clifford(HADAMARD, RING)
    image = h.conjugate_pauli(HierarchyOperator.pauli_x(RING, 0))
    assert equal_up_to_phase(image, HierarchyOperator.pauli_z(RING, 0))
    cnot = synthesize_clifford(CZ_MATRIX, RING).conjugated_by_fourier([1])
    image = cnot.conjugate_pauli(HierarchyOperator.pauli_z(RING, 1, n=2))
    assert pauli_vector(image) == ((0, 0), (1, 1))
    with pytest.raises(SynthesisError):
        h.conjugate_pauli(HierarchyOperator.r_gate(RING, 0, 2))
