import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegel_heat import root_system as rs


def test_root_data():
    for n in (1, 2, 3, 4):
        R = rs.RootSystemData(n)
        assert len(R.positive_roots) == n * n
        assert list(R.rho0) == list(range(n, 0, -1))
        assert R.pairing(np.eye(n)[0], np.eye(n)[0]) == pytest.approx(1 / (4 * (n + 1)))
        assert R.pairing(np.eye(n)[0], np.eye(n)[-1]) == (0.0 if n > 1 else pytest.approx(1 / 8))
        assert sum(1 for _ in R.weyl_group()) == R.weyl_order


def test_spectral_parameter_eigenvalue():
    p = rs.SpectralParameter(np.array([1.0, 1.0]))
    assert p.n == 2 and not p.is_complex
    assert p.eigenvalue == pytest.approx(-7 / 4)


def test_epsilon_examples():
    assert rs.epsilon(np.array([3.0])) == 3.0
    assert rs.epsilon(np.array([2.0, 1.0])) == pytest.approx(6.0)
    assert rs.epsilon(np.array([1.5, 0.2, 1.5])) == 0.0


def test_delta_nu_examples():
    assert rs.delta(np.zeros(3)) == 0.0
    assert rs.nu(np.zeros(3)) == 1.0
    assert rs.delta(np.array([2.0])) == pytest.approx(math.sinh(2))
    expected = math.sinh(2) * math.sinh(1) * math.sinh(1.5) * math.sinh(0.5)
    assert rs.delta(np.array([2.0, 1.0])) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(4.7290, rel=1e-4)


def test_log_abs_delta_matches():
    v = np.array([3.0, 1.2, 0.4])
    assert rs.log_abs_delta(v) == pytest.approx(math.log(abs(rs.delta(v))), rel=1e-13)


def test_tau_examples():
    assert rs.tau(np.array([1e-9])) < 1e-8
    assert rs.tau(np.array([2.0])) == pytest.approx(math.tanh(math.pi), rel=1e-14)
    assert rs.tau(np.array([2.0])) == pytest.approx(0.99627, abs=1e-5)
    assert rs.tau(np.array([1.0, 1.0])) == 0.0


def test_c_inverse_sq_examples():
    assert rs.c_inverse_sq(np.array([0.0])) == 0.0
    assert rs.c_inverse_sq(np.array([2.0])) == pytest.approx(math.tanh(math.pi) / math.sqrt(math.pi))
    assert rs.c_inverse_sq(np.array([2.0])) == pytest.approx(0.56204, rel=1e-4)
    lam = 1e-4
    assert rs.c_inverse_sq(np.array([lam])) / lam**2 == pytest.approx(math.pi / (4 * math.sqrt(math.pi)), rel=1e-6)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_c_inverse_sq_two_routes(seed, n):
    lam = np.random.default_rng(seed).uniform(-3, 3, n)
    assert rs.c_inverse_sq(lam) == pytest.approx(rs.c_inverse_sq_reduced(lam), rel=1e-12, abs=1e-300)


def test_weyl_sum_examples():
    assert rs.weyl_alternating_sum(np.array([0.7]), np.array([1.3])) == pytest.approx(2j * math.sin(0.91))
    assert abs(rs.weyl_alternating_sum(np.array([1.0, 2.0]), np.array([1.0, 1.0]))) < 1e-15
    lam, r = np.array([1.0, 2.0]), np.array([0.5, 0.25])
    expected = -4 * (math.sin(0.5) ** 2 - math.sin(0.25) * math.sin(1.0))
    assert rs.weyl_alternating_sum(lam, r) == pytest.approx(expected, rel=1e-12)
    assert rs.weyl_alternating_sum_brute(lam, r) == pytest.approx(expected, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_weyl_sum_determinant_vs_brute(seed, n):
    rng = np.random.default_rng(seed)
    lam, r = rng.uniform(-3, 3, n), rng.uniform(0, 2, n)
    brute = rs.weyl_alternating_sum_brute(lam, r)
    det = rs.weyl_alternating_sum(lam, r)
    assert abs(det - brute) <= 1e-12 * max(abs(brute), 1e-12) + 1e-13
    real = rs.weyl_alternating_sum_real(lam, r)
    assert real == pytest.approx((det / 1j ** (n * n)).real, rel=1e-12, abs=1e-13)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_sinh_identity(seed, n):
    # Weyl denominator: sum det(sigma) exp(<sigma rho0, 2r>) = 2^{n^2} prod sh(2 r_j) prod sh(r_j +- r_k)
    r = np.random.default_rng(seed).uniform(0.05, 1.5, n)
    R = rs.RootSystemData(n)
    total = sum(det * math.exp(float(np.dot(signs * R.rho0[perm], 2 * r)))
                for perm, signs, det in R.weyl_group())
    prod = float(np.prod(np.sinh(2 * r)))
    for j in range(n):
        for k in range(j + 1, n):
            prod *= math.sinh(r[j] + r[k]) * math.sinh(r[j] - r[k])
    assert total == pytest.approx(2.0 ** (n * n) * prod, rel=1e-10)
    assert total == pytest.approx(2.0 ** (n * n) * rs.delta(2 * r), rel=1e-10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_epsilon_weyl_antisymmetry(seed, n):
    rng = np.random.default_rng(seed)
    v = rng.uniform(-2, 2, n)
    R = rs.RootSystemData(n)
    for perm, signs, det in R.weyl_group():
        assert rs.epsilon(signs * v[perm]) == pytest.approx(det * rs.epsilon(v), rel=1e-12, abs=1e-14)


def test_casimir_examples():
    assert rs.casimir_eigenvalue(np.array([0.0])) == -0.25
    assert rs.casimir_eigenvalue(np.array([0.0, 0.0])) == -1.25
    assert rs.casimir_eigenvalue(np.array([1.0, 1.0])) == -1.75


def test_rho0_pairing():
    assert rs.rho0_pairing(1) == pytest.approx(1 / 8)
    assert rs.rho0_pairing(2) == pytest.approx(5 / 12)
    assert rs.rho0_pairing(3) == pytest.approx(14 / 16)
    for n in (1, 2, 3):
        R = rs.RootSystemData(n)
        assert R.pairing(R.rho0, R.rho0) == pytest.approx(rs.rho0_pairing(n))


def test_pi0_and_vanishing_factors():
    assert rs.pi0(np.array([2.0])) == pytest.approx(2 * 2 / 8)
    assert rs.vanishing_factors(np.array([1.0, 1.0])) == 1
    assert rs.vanishing_factors(np.array([0.0, 1.0])) == 1
    assert rs.vanishing_factors(np.array([0.0, 0.0])) == 4
    assert rs.weyl_dimension_constant(2) == pytest.approx(6.0)


def test_broadcasting():
    lams = np.random.default_rng(0).uniform(0, 2, (5, 7, 3))
    assert rs.epsilon(lams).shape == (5, 7)
    assert np.allclose(rs.tau(lams)[2, 3], rs.tau(lams[2, 3]))
