import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegel_heat import modular_oracle as mo
from siegel_heat.errors import DomainError, ParameterRangeError, TruncationError
from siegel_heat.reduction import sl2z_reduce


def test_delta_at_i():
    # Delta(i) = Gamma(1/4)^24 / (2^24 pi^18)
    expected = math.gamma(0.25) ** 24 / (2**24 * math.pi**18)
    assert mo.delta_cusp_form(1j) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.0017853698506, rel=1e-9)


def test_tau_values():
    f = mo.delta_qexpansion(12)
    assert f.coefficients[:6] == (1, -24, 252, -1472, 4830, -6048)
    assert f.coefficients[11] == -370944


def test_tau_multiplicative():
    t = mo.delta_qexpansion(60).coefficients
    for m, n in ((2, 3), (3, 5), (4, 7), (5, 11)):
        assert t[m * n - 1] == t[m - 1] * t[n - 1]
    # Hecke relation at p = 2
    assert t[3] == t[1] ** 2 - 2**11


@pytest.mark.parametrize("z", [0.3 + 0.9j, -0.2 + 1.5j, 0.11 + 0.6j])
def test_product_matches_q_series(z):
    assert mo.delta_qexpansion(200)(z) == pytest.approx(mo.delta_cusp_form(z), rel=1e-9)


@given(st.floats(-2, 2), st.floats(0.3, 3.0))
def test_periodicity(x, y):
    z = complex(x, y)
    assert mo.delta_cusp_form(z + 1) == pytest.approx(mo.delta_cusp_form(z), rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("z", [2j, 0.4 + 1.1j, -0.3 + 0.8j])
def test_modularity(z):
    assert mo.delta_cusp_form(-1 / z) == pytest.approx(z**12 * mo.delta_cusp_form(z), rel=1e-10)


def test_norm_matches_literature():
    assert mo.delta_norm_sq() == pytest.approx(mo.DELTA_NORM_LITERATURE, rel=1e-6)


def test_norm_resolution_stable():
    a = mo.petersson_norm_sq(mo.delta_qexpansion(60))
    b = mo.petersson_norm_sq(mo.delta_qexpansion(90))
    assert a == pytest.approx(b, rel=1e-6)


def test_norm_scales_quadratically():
    f = mo.delta_qexpansion(60)
    assert mo.petersson_norm_sq(2 * f) == pytest.approx(4 * mo.petersson_norm_sq(f), rel=1e-8)


@given(st.floats(-0.5, 0.5), st.floats(0.87, 2.0), st.integers(-1, 1), st.integers(-3, 3))
def test_density_invariant(x, y, a, b):
    z = complex(x, y)
    # two generator words applied to z; Im w stays above the product's domain limit
    w = -1 / (z + a) + b
    assert mo.s_kappa_direct(w) == pytest.approx(mo.s_kappa_direct(z), rel=1e-9)


@given(st.floats(-3, 3), st.floats(0.1, 4.0))
def test_density_matches_reduced_point(x, y):
    z = complex(x, y)
    zr, g = sl2z_reduce(z)
    assert round(abs(np.linalg.det(g))) == 1
    assert mo.s_kappa_direct(z) == pytest.approx(mo.s_kappa_direct(zr), rel=1e-9)


def test_density_decays_in_cusp():
    assert mo.s_kappa_direct(20j) < 1e-30


def test_density_has_interior_maximum():
    ys = np.linspace(0.87, 4.0, 80)
    vals = [mo.s_kappa_direct(complex(0, y)) for y in ys]
    k = int(np.argmax(vals))
    assert 0 < k < len(ys) - 1
    # y^12 e^{-4 pi y} peaks at 12 / (4 pi); the product factors shift it slightly
    assert ys[k] == pytest.approx(12 / (4 * math.pi), abs=0.05)


def test_eigenfunction_check():
    errs = mo.eigen_check(mo.fundamental_domain_grid(5, 2))
    assert len(errs) == 10
    assert max(errs) < 1e-3


def test_errors():
    with pytest.raises(DomainError):
        mo.delta_cusp_form(0.3 + 0.04j)
    with pytest.raises(ParameterRangeError):
        mo.delta_cusp_form(1j, N=40)
    with pytest.raises(TruncationError):
        mo.delta_qexpansion(5)(0.1 + 0.3j)
    with pytest.raises(DomainError):
        mo.delta_qexpansion(50)(0.1 - 0.3j)
    with pytest.raises(ParameterRangeError):
        mo.s_kappa_direct(1j, kappa=14)


def test_truncation_error_on_small_product():
    with pytest.raises(TruncationError):
        mo.delta_cusp_form(0.06j, N=50)


def test_grid_in_fundamental_domain():
    for z in mo.fundamental_domain_grid():
        assert abs(z.real) <= 0.5 and abs(z) >= 1 - 1e-12
        assert cmath.isfinite(z)
