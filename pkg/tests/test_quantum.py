"""Density-matrix simulator tests against independent linear-algebra oracles."""

import numpy as np
import pytest

from conftest import (
    GATE_2X2,
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    cnot_full,
    embed,
    kraus_depolarize,
    random_density_matrix,
)
from qasrl.quantum import (
    DensityMatrix,
    GateAction,
    GateKind,
    NoiseSpec,
    TargetState,
    apply_gate,
    bell_state,
    fidelity,
    initial_state,
    pauli_expectations,
)

ALL_KINDS = list(GateKind)
ERROR_PROBS = (0.0, 0.005, 0.01, 0.5, 1.0)


def make_action(kind: GateKind, n: int = 2) -> GateAction:
    if kind is GateKind.CNOT:
        return GateAction(kind, target=1, control=0)
    return GateAction(kind, target=0)


class TestInitialState:
    def test_one_qubit(self):
        state = initial_state(1)
        np.testing.assert_allclose(state.elements, [[1, 0], [0, 0]], atol=1e-15)

    def test_two_qubits_single_entry(self):
        state = initial_state(2)
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(state.elements, expected, atol=1e-15)

    def test_three_qubits_valid(self):
        state = initial_state(3)
        assert state.elements.shape == (8, 8)
        state.validate()

    def test_rejects_zero_qubits(self):
        with pytest.raises(ValueError):
            initial_state(0)


class TestGateActions:
    def test_cnot_needs_control(self):
        with pytest.raises(ValueError):
            GateAction(GateKind.CNOT, target=1)

    def test_cnot_control_equals_target(self):
        with pytest.raises(ValueError):
            GateAction(GateKind.CNOT, target=1, control=1)

    def test_single_qubit_gate_rejects_control(self):
        with pytest.raises(ValueError):
            GateAction(GateKind.HADAMARD, target=0, control=1)

    def test_out_of_range_qubit(self):
        with pytest.raises(ValueError):
            apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=2))


class TestApplyGateNoiseless:
    def test_x_flips_msb_qubit(self):
        # qubit 0 is the leftmost tensor factor: X on it sends |00> to |10>
        state = apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=0))
        assert abs(state.elements[2, 2] - 1.0) < 1e-12

    def test_x_flips_lsb_qubit(self):
        state = apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=1))
        assert abs(state.elements[1, 1] - 1.0) < 1e-12

    def test_bell_circuit(self):
        state = initial_state(2)
        state = apply_gate(state, GateAction(GateKind.HADAMARD, target=0))
        state = apply_gate(state, GateAction(GateKind.CNOT, target=1, control=0))
        expected = np.zeros((4, 4), dtype=complex)
        for i in (0, 3):
            for j in (0, 3):
                expected[i, j] = 0.5
        np.testing.assert_allclose(state.elements, expected, atol=1e-12)

    @pytest.mark.parametrize("kind", [k for k in ALL_KINDS if k is not GateKind.ROT_PI4])
    def test_involutions_undo_themselves(self, kind):
        rng = np.random.default_rng(11)
        mat = random_density_matrix(rng, 2)
        state = DensityMatrix(2, mat)
        action = make_action(kind)
        twice = apply_gate(apply_gate(state, action), action)
        np.testing.assert_allclose(twice.elements, mat, atol=1e-12)

    def test_rotation_has_period_eight(self):
        # Rz(pi/4)^8 = -identity; the global phase cancels on the state
        rng = np.random.default_rng(12)
        mat = random_density_matrix(rng, 2)
        state = DensityMatrix(2, mat)
        action = GateAction(GateKind.ROT_PI4, target=1)
        for _ in range(8):
            state = apply_gate(state, action)
        np.testing.assert_allclose(state.elements, mat, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_matches_unitary_conjugation_oracle(self, kind):
        rng = np.random.default_rng(13)
        for _ in range(5):
            mat = random_density_matrix(rng, 2)
            action = make_action(kind)
            got = apply_gate(DensityMatrix(2, mat), action).elements
            if kind is GateKind.CNOT:
                full = cnot_full(0, 1, 2)
            else:
                full = embed({0: GATE_2X2[kind]}, 2)
            np.testing.assert_allclose(got, full @ mat @ full.conj().T, atol=1e-12)

    def test_cnot_reversed_orientation(self):
        # control on qubit 1: |01> -> |11>
        state = apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=1))
        state = apply_gate(state, GateAction(GateKind.CNOT, target=0, control=1))
        assert abs(state.elements[3, 3] - 1.0) < 1e-12


class TestDepolarizingChannel:
    def test_x_at_one_percent_on_ground_state(self):
        # by-hand Kraus route: rho' = diag(p/2, 1 - p/2), <Z> = -(1 - p)
        noise = NoiseSpec(gate_error={GateKind.PAULI_X: 0.01})
        state = apply_gate(initial_state(1), GateAction(GateKind.PAULI_X, target=0), noise)
        np.testing.assert_allclose(state.elements, np.diag([0.005, 0.995]), atol=1e-12)
        z = pauli_expectations(state)[2]
        np.testing.assert_allclose(z, -0.99, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("p", ERROR_PROBS)
    def test_matches_kraus_oracle(self, kind, p):
        rng = np.random.default_rng(101)
        noise = NoiseSpec(gate_error={kind: p})
        for _ in range(3):
            mat = random_density_matrix(rng, 2)
            action = make_action(kind)
            got = apply_gate(DensityMatrix(2, mat), action, noise).elements
            if kind is GateKind.CNOT:
                full = cnot_full(0, 1, 2)
                qubits = (0, 1)
            else:
                full = embed({0: GATE_2X2[kind]}, 2)
                qubits = (0,)
            rotated = full @ mat @ full.conj().T
            np.testing.assert_allclose(got, kraus_depolarize(rotated, qubits, p, 2), atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("p", ERROR_PROBS)
    def test_preserves_state_invariants(self, kind, p):
        rng = np.random.default_rng(7)
        noise = NoiseSpec(gate_error={kind: p})
        for _ in range(3):
            state = DensityMatrix(2, random_density_matrix(rng, 2))
            out = apply_gate(state, make_action(kind), noise)
            assert abs(np.trace(out.elements) - 1.0) < 1e-12
            np.testing.assert_allclose(out.elements, out.elements.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(out.elements).min() >= -1e-9

    def test_full_depolarizing_on_cnot_gives_maximally_mixed(self):
        noise = NoiseSpec(gate_error={GateKind.CNOT: 1.0})
        state = apply_gate(
            initial_state(2), GateAction(GateKind.CNOT, target=1, control=0), noise
        )
        np.testing.assert_allclose(state.elements, np.eye(4) / 4, atol=1e-12)

    def test_single_qubit_full_depolarizing_keeps_other_qubit(self):
        # X with p=1 on qubit 0 of |01>: qubit 0 mixed, qubit 1 stays |1>
        state = apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=1))
        noise = NoiseSpec(gate_error={GateKind.PAULI_X: 1.0})
        state = apply_gate(state, GateAction(GateKind.PAULI_X, target=0), noise)
        expected = np.kron(np.eye(2) / 2, np.diag([0.0, 1.0]))
        np.testing.assert_allclose(state.elements, expected, atol=1e-12)

    def test_three_qubit_embedding(self):
        # noise on the middle qubit must not leak onto its neighbours
        rng = np.random.default_rng(23)
        mat = random_density_matrix(rng, 3)
        noise = NoiseSpec(gate_error={GateKind.HADAMARD: 0.3})
        got = apply_gate(DensityMatrix(3, mat), GateAction(GateKind.HADAMARD, target=1), noise)
        full = embed({1: HADAMARD}, 3)
        rotated = full @ mat @ full.conj().T
        np.testing.assert_allclose(got.elements, kraus_depolarize(rotated, (1,), 0.3, 3), atol=1e-12)


class TestPauliExpectations:
    def test_ground_state(self):
        np.testing.assert_allclose(
            pauli_expectations(initial_state(2)), [0, 0, 1, 0, 0, 1], atol=1e-12
        )

    def test_readout_error_scales_expectations(self):
        noise = NoiseSpec(meas_error=0.01)
        np.testing.assert_allclose(
            pauli_expectations(initial_state(2), noise),
            [0, 0, 0.98, 0, 0, 0.98],
            atol=1e-12,
        )

    def test_readout_error_leaves_state_untouched(self):
        state = initial_state(2)
        before = state.elements.copy()
        pauli_expectations(state, NoiseSpec(meas_error=0.25))
        np.testing.assert_array_equal(state.elements, before)

    def test_bell_state_has_zero_locals(self):
        state = initial_state(2)
        state = apply_gate(state, GateAction(GateKind.HADAMARD, target=0))
        state = apply_gate(state, GateAction(GateKind.CNOT, target=1, control=0))
        np.testing.assert_allclose(pauli_expectations(state), np.zeros(6), atol=1e-12)

    def test_against_operator_trace_oracle(self):
        rng = np.random.default_rng(31)
        paulis = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}
        for _ in range(100):
            mat = random_density_matrix(rng, 2)
            got = pauli_expectations(DensityMatrix(2, mat))
            expected = [
                np.trace(mat @ embed({q: paulis[name]}, 2)).real
                for q in range(2)
                for name in ("X", "Y", "Z")
            ]
            np.testing.assert_allclose(got, expected, atol=1e-10)

    def test_bounded_under_any_noise(self):
        rng = np.random.default_rng(37)
        noise = NoiseSpec(meas_error=0.4)
        for _ in range(50):
            values = pauli_expectations(DensityMatrix(2, random_density_matrix(rng, 2)), noise)
            assert np.all(values <= 1.0) and np.all(values >= -1.0)

    def test_ordering_is_per_qubit_xyz(self):
        # |1> on qubit 1 only: Z1 = -1, Z0 = +1
        state = apply_gate(initial_state(2), GateAction(GateKind.PAULI_X, target=1))
        np.testing.assert_allclose(pauli_expectations(state), [0, 0, 1, 0, 0, -1], atol=1e-12)


class TestFidelity:
    def test_ground_state_against_bell(self):
        np.testing.assert_allclose(fidelity(initial_state(2), bell_state()), 0.5, atol=1e-12)

    def test_bell_against_bell(self):
        state = initial_state(2)
        state = apply_gate(state, GateAction(GateKind.HADAMARD, target=0))
        state = apply_gate(state, GateAction(GateKind.CNOT, target=1, control=0))
        np.testing.assert_allclose(fidelity(state, bell_state()), 1.0, atol=1e-9)

    def test_maximally_mixed(self):
        state = DensityMatrix(2, np.eye(4) / 4)
        np.testing.assert_allclose(fidelity(state, bell_state()), 0.25, atol=1e-12)

    def test_linear_in_the_state(self):
        rng = np.random.default_rng(41)
        target = bell_state()
        for _ in range(20):
            a = rng.uniform(0, 1)
            m1 = random_density_matrix(rng, 2)
            m2 = random_density_matrix(rng, 2)
            mix = fidelity(DensityMatrix(2, a * m1 + (1 - a) * m2), target)
            parts = a * fidelity(DensityMatrix(2, m1), target) + (1 - a) * fidelity(
                DensityMatrix(2, m2), target
            )
            np.testing.assert_allclose(mix, parts, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(initial_state(1), bell_state())


class TestValidation:
    def test_density_matrix_shape_check(self):
        with pytest.raises(ValueError):
            DensityMatrix(2, np.eye(3))

    def test_validate_catches_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(1, np.eye(2)).validate()

    def test_validate_catches_non_hermitian(self):
        mat = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            DensityMatrix(1, mat).validate()

    def test_validate_catches_negative_eigenvalue(self):
        with pytest.raises(ValueError):
            DensityMatrix(1, np.diag([1.5, -0.5])).validate()

    def test_target_state_must_be_normalized(self):
        with pytest.raises(ValueError):
            TargetState(np.array([1.0, 1.0]))

    def test_noise_spec_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            NoiseSpec(gate_error={GateKind.PAULI_X: 1.5})
        with pytest.raises(ValueError):
            NoiseSpec(meas_error=-0.1)

    def test_elements_are_read_only(self):
        state = initial_state(2)
        with pytest.raises(ValueError):
            state.elements[0, 0] = 5.0
