import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from quditworks.errors import BellIndexError, MeasurementError, ShapeError
from quditworks.linalg import QuditRegister, haar_state, tensor
from quditworks.weyl import (BellIndex, bell_measurement, bell_state, bell_vectors,
                             error_operator, omega, project_bell, recovery_operator)

SX = np.array([[0, 1], [1, 0]])
SZ = np.diag([1, -1])


class TestBellState:
    def test_phi00_qubit(self):
        assert_allclose(bell_state(2, 0, 0).amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))

    def test_phi11_qubit(self):
        assert_allclose(bell_state(2, 1, 1).amplitudes, np.array([0, 1, -1, 0]) / math.sqrt(2),
                        atol=1e-16)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_orthonormal_and_complete(self, d):
        v = bell_vectors(d)
        assert np.abs(v.conj() @ v.T - np.eye(d * d)).max() < 1e-12
        assert np.abs(v.T @ v.conj() - np.eye(d * d)).max() < 1e-12

    @pytest.mark.parametrize("m,n", [(-1, 0), (0, 3), (3, 3)])
    def test_index_error(self, m, n):
        with pytest.raises(BellIndexError):
            bell_state(3, m, n)
        with pytest.raises(IndexError):
            error_operator(3, m, n)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_second_factor_error(self, d):
        phi0 = bell_state(d, 0, 0).amplitudes
        for m in range(d):
            for n in range(d):
                got = np.kron(np.eye(d), error_operator(d, m, n)) @ phi0
                assert_allclose(got, bell_state(d, m, n).amplitudes, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_first_factor_error(self, d):
        # (U_{m,n} x I)|Phi_00> is w^{-mn}|Phi_{-m,n}>; it coincides with
        # |Phi_{m,n}> up to phase only when 2m = 0 mod d
        phi0 = bell_state(d, 0, 0).amplitudes
        for m in range(d):
            for n in range(d):
                got = np.kron(error_operator(d, m, n), np.eye(d)) @ phi0
                want = omega(d) ** (-m * n) * bell_state(d, (-m) % d, n).amplitudes
                assert_allclose(got, want, atol=1e-14)
                same = abs(np.vdot(bell_state(d, m, n).amplitudes, got)) > 1 - 1e-12
                assert same == ((2 * m) % d == 0)

    def test_index_helpers(self):
        assert BellIndex.checked(3, 2, 1).flat == 7
        with pytest.raises(BellIndexError):
            BellIndex.checked(1, 0, 0)


class TestOperators:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_identity(self, d):
        assert_allclose(error_operator(d, 0, 0), np.eye(d))
        assert_allclose(recovery_operator(d, 0, 0), np.eye(d))

    def test_paulis(self):
        assert_allclose(error_operator(2, 1, 0), SX)
        assert_allclose(error_operator(2, 0, 1), SZ, atol=1e-16)
        assert_allclose(recovery_operator(2, 1, 0), SX)

    @pytest.mark.parametrize("op", [error_operator, recovery_operator])
    def test_unitary(self, op):
        for m in range(3):
            for n in range(3):
                u = op(3, m, n)
                assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-14

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_weyl_relation(self, d):
        w = omega(d)
        for m in range(d):
            for n in range(d):
                for m2 in range(d):
                    for n2 in range(d):
                        lhs = error_operator(d, m, n) @ error_operator(d, m2, n2)
                        rhs = error_operator(d, (m + m2) % d, (n + n2) % d)
                        assert_allclose(lhs, w ** (m2 * n) * rhs, atol=1e-13)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_recovery_inverts_on_bob(self, d):
        # after outcome (m, n) Bob holds U_{m,-n}|psi>; V_{m;n} undoes it up to phase
        for m in range(d):
            for n in range(d):
                prod = recovery_operator(d, m, n) @ error_operator(d, m, (-n) % d)
                assert_allclose(prod, prod[0, 0] * np.eye(d), atol=1e-13)
                assert abs(abs(prod[0, 0]) - 1) < 1e-14


class TestMeasurement:
    def test_eigenstate(self):
        outs = bell_measurement(bell_state(3, 1, 0), ("A", "B"))
        probs = [o.probability for o in outs]
        assert_allclose(probs[3], 1.0, atol=1e-14)
        assert outs[3].index == BellIndex(1, 0, 3)
        assert outs[3].post_state.labels == ()

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_teleport_outcomes_uniform(self, d, rng):
        psi = haar_state(("A",), (d,), rng)
        state = tensor(psi, bell_state(d, 0, 0, ("A'", "B")))
        outs = bell_measurement(state, ("A", "A'"))
        assert_allclose([o.probability for o in outs], np.full(d * d, 1 / d ** 2), atol=1e-14)
        for o in outs:
            assert o.post_state.labels == ("B",)

    def test_teleport_recovery(self, rng):
        d = 3
        psi = haar_state(("A",), (d,), rng)
        state = tensor(psi, bell_state(d, 0, 0, ("A'", "B")))
        for o in bell_measurement(state, ("A", "A'")):
            fixed = recovery_operator(d, o.index.m, o.index.n) @ o.post_state.amplitudes
            assert abs(abs(np.vdot(psi.amplitudes, fixed)) - 1) < 1e-12

    def test_probabilities_sum(self, rng):
        state = haar_state(("A", "B", "C"), (3, 3, 3), rng)
        outs = bell_measurement(state, ("C", "A"))
        assert abs(sum(o.probability for o in outs) - 1) < 1e-12
        for o in outs:
            assert abs(np.linalg.norm(o.post_state.amplitudes) - 1) < 1e-12

    def test_unequal_dims(self, rng):
        with pytest.raises(ShapeError):
            bell_measurement(haar_state(("A", "B"), (2, 3), rng), ("A", "B"))

    def test_zero_probability_branch(self):
        outs = bell_measurement(bell_state(2, 0, 0), ("A", "B"))
        assert outs[1].post_state is None
        with pytest.raises(MeasurementError):
            project_bell(bell_state(2, 0, 0), ("A", "B"), 0, 1)

    def test_project_bell(self):
        out = project_bell(bell_state(2, 1, 1), ("A", "B"), 1, 1)
        assert_allclose(out.probability, 1.0)

    def test_sample_deterministic(self, rng):
        state = haar_state(("A", "B", "C"), (2, 2, 2), rng)
        a = bell_measurement(state, ("A", "B"), "sample", 99)
        b = bell_measurement(state, ("A", "B"), "sample", 99)
        assert a.index == b.index

    def test_sample_needs_seed(self, rng):
        with pytest.raises(ValueError):
            bell_measurement(haar_state(("A", "B"), (2, 2), rng), ("A", "B"), "sample")

    def test_sample_frequencies(self):
        state = haar_state(("A", "B", "C"), (2, 2, 3), np.random.default_rng(5))
        exact = np.array([o.probability for o in bell_measurement(state, ("A", "B"))])
        gen = np.random.default_rng(2024)
        draws = 100_000
        counts = np.zeros(4)
        for _ in range(draws):
            counts[bell_measurement(state, ("A", "B"), "sample", gen).index.flat] += 1
        sigma = np.sqrt(draws * exact * (1 - exact))
        assert np.all(np.abs(counts - draws * exact) <= 3 * sigma)
