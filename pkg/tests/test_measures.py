import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_unitary
from polariton_gqd.errors import InputDomainError
from polariton_gqd.measures import (
    GQDProfile,
    MeasurementBasis,
    OptimizationConfig,
    _GQDObjective,
    bell_diagonal_qd_oracle,
    bell_diagonal_state,
    bell_weights,
    bipartite_gqd,
    dephase,
    gqd_objective,
    local_projectors,
    minimize_gqd,
    mutual_information,
    qd_asymmetric,
)
from polariton_gqd.qmat import ket, partial_trace, projector, relative_entropy, tensor
from polariton_gqd.scenarios import ghz_state, state_mixture_alpha

# brute force over a 400 x 400 (theta, phi) grid of the measured-side basis
QD_BRUTE_1_M08_08 = 0.5310335510772772

angles = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False)


def random_bell_triple(rng):
    lam = rng.dirichlet(np.ones(4))
    # invert bell_weights: c = A^-1 (4 lam - 1)
    A = np.array([[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)
    c, *_ = np.linalg.lstsq(A, 4 * lam - 1, rcond=None)
    return tuple(c)


def local_rotation(rho, rng):
    n = int(round(math.log2(rho.shape[0])))
    u = tensor(*[random_unitary(2, rng) for _ in range(n)])
    return u @ rho @ u.conj().T


def classical_state(n, rng):
    basis = MeasurementBasis(tuple((rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(n)))
    p = rng.dirichlet(np.ones(2**n))
    return sum(pk * P for pk, P in zip(p, basis.projectors()))


class TestProjectors:
    @given(angles, angles)
    @settings(max_examples=100, deadline=None)
    def test_complete_and_orthogonal(self, theta, phi):
        a, b = local_projectors(theta, phi)
        np.testing.assert_allclose(a + b, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(a @ b, 0, atol=1e-12)
        np.testing.assert_allclose(a @ a, a, atol=1e-12)

    def test_product_projectors_resolve_identity(self, rng):
        basis = MeasurementBasis.from_vector(rng.uniform(0, 3, size=6))
        P = basis.projectors()
        assert len(P) == 8
        np.testing.assert_allclose(sum(P), np.eye(8), atol=1e-12)
        np.testing.assert_allclose(basis.unitary().conj().T @ basis.unitary(), np.eye(8), atol=1e-12)

    def test_angle_normalisation(self):
        b = MeasurementBasis(((3 * math.pi / 2, 0.5),))
        assert b.angles[0] == pytest.approx((math.pi / 2, 0.5 + math.pi))


class TestDephase:
    def test_computational_basis_keeps_diagonal(self):
        np.testing.assert_allclose(dephase(ghz_state(), MeasurementBasis.computational(3)),
                                   np.diag([0.5, 0, 0, 0, 0, 0, 0, 0.5]), atol=1e-15)

    def test_idempotent(self, rng):
        rho = random_density(3, rng)
        basis = MeasurementBasis.from_vector(rng.uniform(0, 3, size=6))
        once = dephase(rho, basis)
        np.testing.assert_allclose(dephase(once, basis), once, atol=1e-12)
        assert abs(np.trace(once) - 1) < 1e-12

    def test_matches_projector_sum(self, rng):
        rho = random_density(2, rng)
        basis = MeasurementBasis.from_vector(rng.uniform(0, 3, size=4))
        direct = sum(P @ rho @ P for P in basis.projectors())
        np.testing.assert_allclose(dephase(rho, basis), direct, atol=1e-12)

    def test_site_mismatch(self, rng):
        with pytest.raises(InputDomainError):
            dephase(random_density(3, rng), MeasurementBasis.computational(2))


class TestMutualInformation:
    def test_bell(self):
        assert mutual_information(projector((ket("00") + ket("11")) / math.sqrt(2))) == pytest.approx(2.0)

    def test_product(self, rng):
        rho = np.kron(random_density(1, rng), random_density(1, rng))
        assert mutual_information(rho) == pytest.approx(0.0, abs=1e-10)

    def test_cut_on_three_sites(self):
        # GHZ: S(1) = S(23) = 1, S(123) = 0
        assert mutual_information(ghz_state(), ((1,), (2, 3))) == pytest.approx(2.0)

    def test_requires_cut(self, rng):
        with pytest.raises(InputDomainError):
            mutual_information(random_density(3, rng))


class TestObjective:
    def test_ghz_computational(self):
        assert gqd_objective(ghz_state(), MeasurementBasis.computational(3)) == pytest.approx(1.0, abs=1e-12)

    def test_fast_route_matches_relative_entropy_route(self, rng):
        rho = random_density(3, rng)
        x = rng.uniform(0, 2 * math.pi, size=(10, 3, 2))
        fast = _GQDObjective(rho)(x)
        slow = [gqd_objective(rho, MeasurementBasis.from_vector(v.ravel())) for v in x]
        np.testing.assert_allclose(fast, slow, atol=1e-10)

    def test_outcome_swap_invariance(self, rng):
        rho = random_density(3, rng)
        x = rng.uniform(0, math.pi, size=6)
        flipped = x.copy()
        flipped[0::2] = math.pi - x[0::2]
        flipped[1::2] = x[1::2] + math.pi
        assert gqd_objective(rho, MeasurementBasis.from_vector(x)) == pytest.approx(
            gqd_objective(rho, MeasurementBasis.from_vector(flipped)), abs=1e-10)

    def test_nonnegative_at_random_bases(self, rng):
        rho = random_density(3, rng)
        for _ in range(20):
            assert gqd_objective(rho, MeasurementBasis.from_vector(rng.uniform(0, 6, size=6))) >= -1e-10


class TestMinimizeGQD:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_alpha_family(self, alpha):
        rep = minimize_gqd(state_mixture_alpha(alpha))
        assert rep.value == pytest.approx(1.0, abs=1e-5)

    def test_report_is_self_consistent(self, rng):
        rho = random_density(3, rng)
        rep = minimize_gqd(rho)
        assert rep.raw_value == gqd_objective(rho, rep.optimal_basis)
        assert rep.value == max(rep.raw_value, 0.0)
        assert 1 <= rep.starts_agreeing <= rep.n_starts

    def test_not_worse_than_random_bases(self, rng):
        rho = random_density(3, rng)
        best = minimize_gqd(rho).value
        trial = min(gqd_objective(rho, MeasurementBasis.from_vector(rng.uniform(0, 6, size=6)))
                    for _ in range(200))
        assert best <= trial + 1e-9

    @pytest.mark.parametrize("n", [2, 3])
    def test_classical_states_vanish(self, n, rng):
        for _ in range(3):
            assert minimize_gqd(classical_state(n, rng)).value <= 1e-6

    def test_local_unitary_invariance(self, rng):
        rho = random_density(3, rng, rank=2)
        a = minimize_gqd(rho).value
        b = minimize_gqd(local_rotation(rho, rng)).value
        assert abs(a - b) <= 2e-3

    def test_deterministic_for_fixed_seed(self, rng):
        rho = random_density(3, rng)
        opt = OptimizationConfig(seed=7)
        assert minimize_gqd(rho, opt) == minimize_gqd(rho, opt)

    def test_config_validation(self):
        with pytest.raises(InputDomainError):
            OptimizationConfig(n_starts=0)


class TestBipartite:
    def test_bell_pair(self):
        rep = bipartite_gqd(state_mixture_alpha(0.0), (1, 3))
        assert rep.value == pytest.approx(1.0, abs=1e-5)

    def test_unentangled_pair(self):
        assert bipartite_gqd(state_mixture_alpha(0.0), (1, 2)).value <= 1e-6

    def test_same_site_rejected(self):
        with pytest.raises(InputDomainError):
            bipartite_gqd(ghz_state(), (2, 2))

    def test_two_qubit_gqd_is_at_least_discord(self, rng):
        # with one side unmeasured the relative-entropy cost can only drop
        rho = random_density(2, rng)
        assert minimize_gqd(rho).value >= qd_asymmetric(rho).value - 1e-6


class TestProfile:
    def test_alpha_zero_residuals(self):
        prof = GQDProfile.of(state_mixture_alpha(0.0))
        np.testing.assert_allclose(prof.residuals, (0.0, 1.0, 1 / 3), atol=1e-5)
        assert prof.mgqd == pytest.approx(0.0, abs=1e-5)

    def test_ghz_profile(self):
        prof = GQDProfile.of(ghz_state())
        # each GHZ pair is a classically correlated mixture
        for rep in (prof.gqd_12, prof.gqd_13, prof.gqd_23):
            assert rep.value <= 1e-6
        assert prof.mgqd == pytest.approx(1.0, abs=1e-5)

    def test_needs_three_sites(self, rng):
        with pytest.raises(InputDomainError):
            GQDProfile.of(random_density(2, rng))


class TestBellDiagonal:
    def test_weights_sum_to_one(self, rng):
        for _ in range(10):
            c = random_bell_triple(rng)
            assert bell_weights(*c).sum() == pytest.approx(1.0)
            np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(bell_diagonal_state(*c))),
                                       np.sort(bell_weights(*c)), atol=1e-12)

    def test_pauli_expansion(self):
        X = np.array([[0, 1], [1, 0]])
        Y = np.array([[0, -1j], [1j, 0]])
        Z = np.diag([1, -1])
        c = (0.3, -0.2, 0.1)
        direct = (np.eye(4) + c[0] * np.kron(X, X) + c[1] * np.kron(Y, Y) + c[2] * np.kron(Z, Z)) / 4
        np.testing.assert_allclose(bell_diagonal_state(*c), direct, atol=1e-15)

    def test_invalid_triple(self):
        with pytest.raises(InputDomainError):
            bell_diagonal_state(1.0, 1.0, 1.0)

    def test_oracle_limits(self):
        assert bell_diagonal_qd_oracle(1.0, -1.0, 1.0) == pytest.approx(1.0)
        assert bell_diagonal_qd_oracle(0.0, 0.0, 0.0) == pytest.approx(0.0)
        assert bell_diagonal_qd_oracle(0.0, 0.0, 0.7) == pytest.approx(0.0, abs=1e-12)

    def test_frozen_brute_force_value(self):
        # the grid value can only overshoot the true discord
        oracle = bell_diagonal_qd_oracle(1.0, -0.8, 0.8)
        assert abs(oracle - QD_BRUTE_1_M08_08) <= 1e-4
        assert oracle <= QD_BRUTE_1_M08_08
        assert abs(qd_asymmetric(bell_diagonal_state(1.0, -0.8, 0.8)).value - oracle) <= 1e-6

    @pytest.mark.parametrize("side", [1, 2])
    def test_qd_matches_oracle(self, rng, side):
        for _ in range(5):
            c = random_bell_triple(rng)
            got = qd_asymmetric(bell_diagonal_state(*c), measured_side=side).value
            assert got == pytest.approx(bell_diagonal_qd_oracle(*c), abs=1e-6)


class TestQDAsymmetric:
    def test_classical_quantum_state(self, rng):
        # classical on site 1: measuring site 1 costs nothing
        r0, r1 = random_density(1, rng), random_density(1, rng)
        rho = 0.3 * np.kron(np.diag([1, 0]), r0) + 0.7 * np.kron(np.diag([0, 1]), r1)
        rho = local_rotation(rho, rng)
        assert qd_asymmetric(rho, measured_side=1).value <= 1e-6

    def test_pure_state_equals_entanglement_entropy(self, rng):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        rho = projector(v / np.linalg.norm(v))
        ent = relative_entropy(partial_trace(rho, (1,)), np.eye(2) / 2)
        s = 1.0 - ent
        assert qd_asymmetric(rho).value == pytest.approx(s, abs=1e-6)

    def test_bad_side(self, rng):
        with pytest.raises(InputDomainError):
            qd_asymmetric(random_density(2, rng), measured_side=3)
