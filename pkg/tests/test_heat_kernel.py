import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from siegel_heat import heat_kernel as hk
from siegel_heat.errors import DomainError, ParameterRangeError
from siegel_heat.integration import QuadratureSpec
from siegel_heat.symplectic_core import RadialVector

GL = QuadratureSpec(method="gauss_legendre", points=400)
AMP = 4 * math.sqrt(math.pi)


def fj1(t, rs):
    v, _ = hk.heat_kernel_fj_grid(1, t, np.asarray(rs, dtype=float)[:, None], GL)
    return v


def classical_mpmath(d, t):
    """Same classical kernel written with ch s - ch d = 2 sh((s+d)/2) sh((s-d)/2), by mpmath."""
    def f(s):
        if s <= d:
            return mpmath.mpf(0)
        return s * mpmath.exp(-s * s / (4 * t)) / mpmath.sqrt(2 * mpmath.sinh((s + d) / 2) * mpmath.sinh((s - d) / 2))
    val = mpmath.quad(f, [d, d + 1, mpmath.inf])
    return float(mpmath.sqrt(2) * (4 * mpmath.pi * t) ** -1.5 * mpmath.exp(-t / 4) * val)


def test_query_validation():
    with pytest.raises(ParameterRangeError):
        hk.HeatKernelQuery(1, 0.0, RadialVector([0.5]))
    with pytest.raises(DomainError):
        hk.HeatKernelQuery(2, 1.0, RadialVector([0.5]))
    with pytest.raises(ParameterRangeError):
        hk.HeatKernelQuery(1, 1.0, RadialVector([0.5]), kappa=-1)
    with pytest.raises(ParameterRangeError):
        hk.heat_kernel_fj(hk.HeatKernelQuery(1, 1.0, [0.5], kappa=3))


def test_fj_monotone_in_t():
    for r in (0.0, 0.5, 1.0):
        assert fj1(1.0, [r])[0] > fj1(2.0, [r])[0]


def test_fj_decreasing_in_r_and_positive():
    v = fj1(1.0, [0.0, 0.25, 0.5, 1.0, 2.0])
    assert np.all(v > 0) and np.all(np.diff(v) < 0)


def test_fj_gaussian_decay():
    v = fj1(1.0, [0.0, 10.0])
    assert v[1] < 1e-8 * v[0]


@pytest.mark.parametrize("r,t", [(0.5, 1.0), (0.0, 0.5), (1.0, 2.0), (1.5, 0.7)])
def test_fj_matches_classical_after_calibration(r, t):
    assert fj1(t, [r])[0] == pytest.approx(AMP * hk.classical_h2_heat_kernel(2 * r, t), rel=1e-6)


def test_fit_recovers_parametrization():
    fit = hk.fit_h2_parametrization(points=200)
    assert fit["a"] == pytest.approx(2.0, rel=1e-3)
    assert fit["b"] == pytest.approx(1.0, rel=1e-3)
    assert fit["amplitude"] == pytest.approx(AMP, rel=1e-3)


def test_fj_mc_matches_quadrature_n1():
    spec = QuadratureSpec(samples=200_000, seed=1)
    v, e = hk.heat_kernel_fj_grid(1, 1.0, [[0.5]], spec)
    assert abs(v[0] - fj1(1.0, [0.5])[0]) <= 3 * e[0]


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_spectral_matches_fj_n1(t):
    spec = QuadratureSpec(samples=100_000, seed=2)
    rs = np.array([[0.0], [0.5], [1.0]])
    v, e = hk.heat_kernel_spectral_grid(1, t, rs, spec)
    assert np.all(np.abs(v - fj1(t, rs[:, 0])) <= 3 * e)


def test_spectral_matches_fj_n2():
    rs = np.array([[0.5, 0.2]])
    a, ea = hk.heat_kernel_fj_grid(2, 1.0, rs, QuadratureSpec(samples=100_000, seed=3))
    b, eb = hk.heat_kernel_spectral_grid(2, 1.0, rs, QuadratureSpec(samples=10_000, seed=4))
    assert a[0] > 0 and abs(a[0] - b[0]) <= 3 * (ea[0] + eb[0])


def test_spectral_refuses_small_t():
    with pytest.raises(ParameterRangeError):
        hk.heat_kernel_spectral_grid(1, 0.05, [[0.0]], QuadratureSpec(samples=100))


def test_spectral_on_diagonal_and_long_time():
    spec = QuadratureSpec(samples=50_000, seed=5)
    scaled = []
    for t in (1.0, 2.0, 4.0, 8.0):
        v, e = hk.heat_kernel_spectral(hk.HeatKernelQuery(1, t, [0.0], spec=spec))
        assert v > 0 and np.isfinite(v)
        scaled.append(v * math.exp(t / 4))
    assert max(scaled) < 10 * scaled[0] and np.all(np.diff(scaled) < 0)


# ---- weighted bound

def test_weighted_bound_requires_large_weight():
    with pytest.raises(ParameterRangeError):
        hk.heat_kernel_weighted_bound_grid(1, 1.0, [[0.0]], 1.0, GL)


@pytest.mark.parametrize("t", [0.05, 1 / 3, 1.0, 10.0])
def test_weighted_bound_finite(t):
    v, _ = hk.heat_kernel_weighted_bound_grid(1, t, [[0.0]], 12.0, GL)
    assert np.isfinite(v[0]) and v[0] > 0


def test_weighted_bound_log_scale():
    a, _ = hk.heat_kernel_weighted_bound_grid(1, 2.0, [[0.3]], 12.0, GL)
    b, _ = hk.heat_kernel_weighted_bound_grid(1, 2.0, [[0.3]], 12.0, GL, log_scale=-5.0)
    assert b[0] == pytest.approx(a[0] * math.exp(-5.0), rel=1e-12)


def test_weighted_bound_ratio_grows_with_kappa():
    base = fj1(1.0, [0.0])[0]
    ratios = [hk.heat_kernel_weighted_bound_grid(1, 1.0, [[0.0]], k, GL)[0][0] / base for k in (2, 4, 8, 12)]
    assert np.all(np.diff(ratios) > 0) and ratios[0] > 1


@pytest.mark.parametrize("n,kappa", [(1, 2.0), (1, 12.0), (2, 3.0)])
def test_weighted_bound_dominates_weighted_kernel(n, kappa):
    q = hk.HeatKernelQuery(n, 0.5, np.linspace(0.6, 0.2, n), kappa=kappa,
                           spec=QuadratureSpec(samples=50_000, seed=6))
    (w, we), (b, be), worst = hk.heat_kernel_weighted_fj(q, with_bound=True)
    assert worst <= 1 + 1e-9
    assert w <= b + 3 * (we + be)
    assert hk.heat_kernel_weighted_fj(q) == (w, we)


# ---- classical oracle

def test_classical_value_at_origin():
    v = hk.classical_h2_heat_kernel(0.0, 1.0)
    assert v == pytest.approx(classical_mpmath(0.0, 1.0), rel=1e-10)
    assert v == pytest.approx(0.0575358, rel=1e-6)


@pytest.mark.parametrize("d,t", [(0.5, 1.0), (2.0, 0.3), (5.0, 3.0)])
def test_classical_vs_mpmath(d, t):
    assert hk.classical_h2_heat_kernel(d, t) == pytest.approx(classical_mpmath(d, t), rel=1e-9)


def test_classical_decreasing_in_d():
    v = [hk.classical_h2_heat_kernel(d, 1.0) for d in np.linspace(0, 6, 25)]
    assert np.all(np.diff(v) < 0)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_classical_mass_conservation(t):
    mass, _ = integrate.quad(lambda s: hk.classical_h2_heat_kernel(s, t) * 2 * math.pi * math.sinh(s),
                             0, 40 + 10 * t, limit=200)
    assert mass == pytest.approx(1.0, rel=0.01)


def test_classical_domain():
    with pytest.raises(ParameterRangeError):
        hk.classical_h2_heat_kernel(-1.0, 1.0)
    with pytest.raises(ParameterRangeError):
        hk.classical_h2_heat_kernel(1.0, 0.0)
