import numpy as np
import pytest

from decint.tableau import Tableau, pauli_product


def arr(*bits):
    return np.array(bits, dtype=np.uint8)


class TestPauliProduct:
    def test_ixz_is_y(self):
        x, z, s = pauli_product([(arr(1), arr(0), 0), (arr(0), arr(1), 0)], extra_i=1)
        assert (x[0], z[0], s) == (1, 1, 0)

    def test_xz_alone_not_hermitian(self):
        with pytest.raises(ValueError):
            pauli_product([(arr(1), arr(0), 0), (arr(0), arr(1), 0)])

    def test_yy_identity(self):
        x, z, s = pauli_product([(arr(1), arr(1), 0), (arr(1), arr(1), 0)])
        assert (x[0], z[0], s) == (0, 0, 0)

    def test_xx_identity_with_signs(self):
        x, z, s = pauli_product([(arr(1), arr(0), 1), (arr(1), arr(0), 0)])
        assert (x[0], z[0], s) == (0, 0, 1)

    def test_zx_with_cube_i(self):
        # i^3 * Z * X = Y
        x, z, s = pauli_product([(arr(0), arr(1), 0), (arr(1), arr(0), 0)], extra_i=3)
        assert (x[0], z[0], s) == (1, 1, 0)


class TestStates:
    def test_zero_state_measurement(self):
        t = Tableau.zero_state(["a"])
        out, det = t.measure_z("a")
        assert (out, det) == (0, True)
        assert t.n == 0

    def test_x_flips_outcome(self):
        t = Tableau.zero_state(["a"])
        t.apply_x("a")
        assert t.measure_z("a") == (1, True)

    def test_bell_pair_correlation(self):
        for seed in range(12):
            t = Tableau.zero_state([0, 1])
            t.apply_h(0)
            t.apply_cnot(0, 1)
            rng = np.random.default_rng(seed)
            o0, det0 = t.measure_z(0, rng)
            o1, det1 = t.measure_z(1, rng)
            assert not det0 and det1
            assert o0 == o1

    def test_plus_state_x_expectation(self):
        t = Tableau.zero_state([0])
        t.apply_h(0)
        assert t.expectation_z(arr(1), arr(0)) == 0
        assert t.expectation_z(arr(0), arr(1)) is None

    def test_s_gate_makes_y_eigenstate(self):
        t = Tableau.zero_state([0])
        t.apply_h(0)
        t.apply_s(0)
        assert t.expectation_z(arr(1), arr(1)) == 0

    def test_h_conjugates_y_to_minus_y(self):
        t = Tableau.zero_state([0])
        t.apply_h(0)
        t.apply_s(0)
        t.apply_h(0)
        assert t.expectation_z(arr(1), arr(1)) == 1

    def test_random_outcome_both_values(self):
        seen = set()
        for seed in range(20):
            t = Tableau.zero_state([0])
            t.apply_h(0)
            out, det = t.measure_z(0, np.random.default_rng(seed))
            assert not det
            seen.add(out)
        assert seen == {0, 1}

    def test_same_state_across_constructions(self):
        a = Tableau.zero_state([0, 1])
        a.apply_h(0)
        a.apply_cnot(0, 1)
        # Same Bell pair from the other side.
        b = Tableau.zero_state([0, 1])
        b.apply_h(1)
        b.apply_cnot(1, 0)
        assert a.same_state(b)

    def test_different_states_detected(self):
        a = Tableau.zero_state([0])
        b = Tableau.zero_state([0])
        b.apply_x(0)
        assert not a.same_state(b)

    def test_apply_pauli_anticommutation_signs(self):
        t = Tableau.zero_state([0, 1])
        t.apply_pauli(arr(1, 0), arr(0, 0))  # X on qubit 0
        assert t.measure_z(0) == (1, True)
        assert t.measure_z(1) == (0, True)

    def test_reset_zero_on_entangled_wire(self):
        t = Tableau.zero_state([0, 1])
        t.apply_h(0)
        t.apply_cnot(0, 1)
        t.reset_zero(0)
        out, det = t.measure_z(0)
        assert (out, det) == (0, True)

    def test_tensor(self):
        a = Tableau.zero_state(["a"])
        b = Tableau.zero_state(["b"])
        b.apply_x("b")
        t = a.tensor(b)
        assert t.measure_z("a") == (0, True)
        assert t.measure_z("b") == (1, True)

    def test_invalid_generators_rejected(self):
        # X_0 and Z_0 anticommute.
        with pytest.raises(ValueError):
            Tableau(
                [0, 1],
                np.array([[1, 0], [0, 0]]),
                np.array([[0, 0], [1, 0]]),
                np.array([0, 0]),
            )
        # Dependent generators (Z_0 twice).
        with pytest.raises(ValueError):
            Tableau(
                [0, 1],
                np.zeros((2, 2), dtype=np.uint8),
                np.array([[1, 0], [1, 0]]),
                np.array([0, 0]),
            )
