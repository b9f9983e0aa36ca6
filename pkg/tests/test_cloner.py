import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from quditworks.cloner import (HeisenbergMachine, OptimalMachineParams, apply_cloner,
                               b_coefficients, clone_fidelities, closed_form_clones,
                               fidelity_sum_profile, gamma_from_beta, machine_basis_matrix,
                               machine_basis_states, optimal_machine, profile_argmax,
                               werner_fidelity)
from quditworks.errors import NormalizationError, ParameterError, ShapeError
from quditworks.linalg import QuditRegister, fidelity, haar_state


def random_beta(d, rng):
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return b / np.linalg.norm(b)


def identity_beta(d):
    b = np.zeros((d, d))
    b[0, 0] = 1
    return b


class TestGamma:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_identity_machine(self, d):
        assert_allclose(gamma_from_beta(identity_beta(d)), np.full((d, d), 1 / d), atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3])
    def test_symmetric_machine_self_dual(self, d):
        m = optimal_machine(d, 0.5)
        assert_allclose(m.gamma, m.beta, atol=1e-14)

    def test_norm_and_involution(self, rng):
        for _ in range(100):
            beta = random_beta(int(rng.integers(2, 6)), rng)
            gamma = gamma_from_beta(beta)
            assert abs(np.sum(np.abs(gamma) ** 2) - 1) < 1e-12
            assert np.abs(gamma_from_beta(gamma) - beta).max() < 1e-12

    def test_rejects_unnormalized(self):
        with pytest.raises(NormalizationError):
            gamma_from_beta(np.ones((2, 2)))

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            gamma_from_beta(np.ones((2, 3)) / math.sqrt(6))

    def test_brute_force_sum(self, rng):
        d = 3
        beta = random_beta(d, rng)
        w = np.exp(2j * np.pi / d)
        want = np.array([[sum(w ** (n * x - m * y) * beta[x, y]
                              for x in range(d) for y in range(d)) / d
                          for n in range(d)] for m in range(d)])
        assert_allclose(gamma_from_beta(beta), want, atol=1e-14)


class TestB:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_identity_machine(self, d):
        b = b_coefficients(identity_beta(d))
        assert_allclose(b[0], np.full(d, 1 / math.sqrt(d)), atol=1e-15)
        assert_allclose(b[1:], 0, atol=1e-15)

    @pytest.mark.parametrize("d,p", [(2, 0.5), (3, 0.3), (4, 0.8)])
    def test_optimal_machine_pattern(self, d, p):
        par = OptimalMachineParams(d, p)
        nu, mu = par.nu, par.mu
        b = optimal_machine(d, p).b
        want = np.zeros((d, d))
        want[0, 0] = (nu + (d - 1) * mu) / math.sqrt(d)
        want[1:, 0] = math.sqrt(d) * mu
        want[0, 1:] = (nu - mu) / math.sqrt(d)
        assert_allclose(b, want, atol=1e-14)

    def test_norm(self, rng):
        for _ in range(50):
            b = b_coefficients(random_beta(3, rng))
            assert abs(np.sum(np.abs(b) ** 2) - 1) < 1e-12


class TestOptimalMachine:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 1.0])
    def test_params(self, d, p):
        par = OptimalMachineParams(d, p)
        assert abs(par.nu ** 2 + (d * d - 1) * par.mu ** 2 - 1) < 1e-12
        s = par.nu + (d - 1) * par.mu
        assert s > 0
        assert_allclose((par.nu - par.mu) / s, p, atol=1e-14)
        assert_allclose(d * par.mu / s, 1 - p, atol=1e-14)

    def test_universal_beta(self):
        beta = optimal_machine(3, 0.3).beta
        off = np.abs(beta).ravel()[1:]
        assert abs(np.sum(np.abs(beta) ** 2) - 1) < 1e-12
        assert np.ptp(off) < 1e-15
        assert np.all(np.isreal(beta))

    def test_symmetric_qubit_display(self):
        phi = machine_basis_states(optimal_machine(2, 0.5))
        c = math.sqrt(2 / 3)
        want0 = np.zeros(8)
        want0[[0b000, 0b011, 0b101]] = [c, c / 2, c / 2]
        want1 = np.zeros(8)
        want1[[0b111, 0b100, 0b010]] = [c, c / 2, c / 2]
        assert_allclose(phi[0].amplitudes, want0, atol=1e-15)
        assert_allclose(phi[1].amplitudes, want1, atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3])
    def test_perfect_first_clone(self, d):
        phi = machine_basis_states(optimal_machine(d, 1.0))
        for j in range(d):
            t = np.zeros((d, d, d))
            for r in range(d):
                t[j, (j + r) % d, (j + r) % d] = 1 / math.sqrt(d)
            assert_allclose(phi[j].amplitudes, t.ravel(), atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("p", [0.0, 0.37, 1.0])
    def test_general_form(self, d, p):
        q = 1 - p
        norm = 1 / math.sqrt(1 + (d - 1) * (p * p + q * q))
        phi = machine_basis_states(optimal_machine(d, p))
        for j in range(d):
            t = np.zeros((d, d, d))
            t[j, j, j] = norm
            for r in range(1, d):
                t[j, (j + r) % d, (j + r) % d] = norm * p
                t[(j + r) % d, j, (j + r) % d] = norm * q
            assert_allclose(phi[j].amplitudes, t.ravel(), atol=1e-14)

    @pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
    def test_range(self, p):
        with pytest.raises(ParameterError):
            optimal_machine(2, p)


class TestBasisStates:
    @pytest.mark.parametrize("d", [2, 3])
    def test_identity_machine(self, d):
        phi = machine_basis_states(HeisenbergMachine(identity_beta(d)))
        for j in range(d):
            t = np.zeros((d, d, d))
            for r in range(d):
                t[j, (j + r) % d, (j + r) % d] = 1 / math.sqrt(d)
            assert_allclose(phi[j].amplitudes, t.ravel(), atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_orthonormal(self, d, rng):
        mat = machine_basis_matrix(HeisenbergMachine(random_beta(d, rng)))
        assert np.abs(mat.conj() @ mat.T - np.eye(d)).max() < 1e-12

    def test_labels(self):
        assert machine_basis_states(optimal_machine(2, 0.5))[0].labels == ("B", "C", "D")


class TestApplyCloner:
    def test_symmetric_on_zero(self):
        out = apply_cloner(optimal_machine(2, 0.5), [1, 0])
        want = np.diag([5 / 6, 1 / 6])
        assert_allclose(out.rho_B.matrix, want, atol=1e-14)
        assert_allclose(out.rho_C.matrix, want, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3])
    def test_extreme(self, d, rng):
        psi = haar_state(("B",), (d,), rng)
        out = apply_cloner(optimal_machine(d, 1.0), psi)
        assert_allclose(out.rho_B.matrix, psi.density().matrix, atol=1e-14)
        assert_allclose(out.rho_C.matrix, np.eye(d) / d, atol=1e-14)

    def test_oracle_random_optimal(self, rng):
        m = optimal_machine(3, 0.3)
        psi = haar_state(("B",), (3,), rng)
        out = apply_cloner(m, psi)
        rb, rc = closed_form_clones(m, psi)
        assert np.linalg.norm(out.rho_B.matrix - rb.matrix) < 1e-10
        assert np.linalg.norm(out.rho_C.matrix - rc.matrix) < 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_oracle_random_machines(self, d, rng):
        for _ in range(20):
            m = HeisenbergMachine(random_beta(d, rng))
            psi = haar_state(("B",), (d,), rng)
            out = apply_cloner(m, psi)
            rb, rc = closed_form_clones(m, psi)
            assert np.linalg.norm(out.rho_B.matrix - rb.matrix) < 1e-10
            assert np.linalg.norm(out.rho_C.matrix - rc.matrix) < 1e-10

    def test_swap_symmetry(self, rng):
        m = HeisenbergMachine(random_beta(3, rng))
        psi = haar_state(("B",), (3,), rng)
        a, b = apply_cloner(m, psi), apply_cloner(m.swapped(), psi)
        assert np.linalg.norm(a.rho_B.matrix - b.rho_C.matrix) < 1e-10
        assert np.linalg.norm(a.rho_C.matrix - b.rho_B.matrix) < 1e-10

    @pytest.mark.parametrize("d,p", [(2, 0.2), (3, 0.5), (4, 0.9)])
    def test_universality(self, d, p):
        gen = np.random.default_rng(d)
        m = optimal_machine(d, p)
        vals = []
        for _ in range(50):
            psi = haar_state(("B",), (d,), gen)
            vals.append(fidelity(psi, apply_cloner(m, psi).rho_B))
        assert np.ptp(vals) < 1e-10
        assert_allclose(vals[0], clone_fidelities(d, p)[0], atol=1e-12)

    @pytest.mark.parametrize("d,p", [(2, 0.2), (3, 0.7)])
    def test_gamma_uniform(self, d, p):
        off = np.abs(optimal_machine(d, p).gamma).ravel()[1:]
        assert np.ptp(off) < 1e-14

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            apply_cloner(optimal_machine(2, 0.5), [1, 0, 0])

    def test_unnormalized(self):
        with pytest.raises(NormalizationError):
            apply_cloner(optimal_machine(2, 0.5), [1, 1])


class TestFidelities:
    @pytest.mark.parametrize("d,p,want", [(2, 0.5, (5 / 6, 5 / 6)), (2, 0.0, (0.5, 1.0)),
                                          (4, 0.5, (0.7, 0.7)), (3, 0.5, (0.75, 0.75)),
                                          (5, 0.5, (2 / 3, 2 / 3))])
    def test_values(self, d, p, want):
        assert_allclose(clone_fidelities(d, p), want, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(d=st.integers(2, 6), p=st.floats(0, 1))
    def test_bounds_and_swap(self, d, p):
        fb, fc = clone_fidelities(d, p)
        assert 1 / d - 1e-15 <= fb <= 1 + 1e-15
        assert 1 / d - 1e-15 <= fc <= 1 + 1e-15
        assert_allclose(clone_fidelities(d, 1 - p)[::-1], (fb, fc), atol=1e-15)

    @pytest.mark.parametrize("args,want", [((1, 2, 2), 5 / 6), ((1, 2, 4), 0.7),
                                           ((3, 3, 3), 1.0), ((1, 1, 5), 1.0)])
    def test_werner(self, args, want):
        assert_allclose(werner_fidelity(*args), want, atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_werner_matches_symmetric(self, d):
        assert_allclose(werner_fidelity(1, 2, d), clone_fidelities(d, 0.5)[0], atol=1e-15)

    @pytest.mark.parametrize("args", [(2, 1, 2), (0, 1, 2), (1, 2, 1)])
    def test_werner_invalid(self, args):
        with pytest.raises(ParameterError):
            werner_fidelity(*args)


class TestProfile:
    def test_half(self):
        assert_allclose(fidelity_sum_profile(2, [0.5])[0][1], 5 / 3, atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_argmax_and_symmetry(self, d):
        grid = np.linspace(0, 1, 1001)
        prof = fidelity_sum_profile(d, grid)
        assert profile_argmax(prof) == 0.5
        vals = np.array([v for _, v in prof])
        assert np.abs(vals - vals[::-1]).max() < 1e-12
        bound = 1 + 1 / (1 + (d - 1) / 2)
        assert np.all(vals <= bound + 1e-15)
        assert np.sum(vals >= bound - 1e-15) == 1

    def test_matches_fidelities(self):
        for p, s in fidelity_sum_profile(3, [0.1, 0.4]):
            assert_allclose(sum(clone_fidelities(3, p)), s, atol=1e-15)

    def test_empty(self):
        with pytest.raises(ParameterError):
            fidelity_sum_profile(2, [])
