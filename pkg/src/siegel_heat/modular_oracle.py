"""Degree-one ground truth: the discriminant cusp form of weight 12."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError, ParameterRangeError, TruncationError
from .symplectic_core import apply_maass_laplacian

MIN_IMAG = 0.05
MIN_TERMS = 50
DEFAULT_TERMS = 200
TRUNCATION_TOL = 1e-10
NORM_RTOL = 1e-6
# <Delta, Delta> over SL2(Z)\H with dx dy / y^2 (literature value, used as a cross-check)
DELTA_NORM_LITERATURE = 1.03536205680e-6


@dataclass(frozen=True)
class QExpansion:
    weight: int
    coefficients: tuple  # a(1), ..., a(N)

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def __mul__(self, c):
        return QExpansion(self.weight, tuple(c * a for a in self.coefficients))

    __rmul__ = __mul__

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        if z.imag <= 0:
            raise DomainError("z must lie in the upper half plane")
        q = np.exp(2j * np.pi * z)
        k = np.arange(1, self.N + 1)
        a = np.asarray(self.coefficients, dtype=float)
        tail = float(np.max(np.abs(a[-3:]))) * abs(q) ** (self.N + 1) / max(1 - abs(q), 1e-300)
        val = complex(np.sum(a * q**k))
        if tail > TRUNCATION_TOL * max(abs(val), 1e-300):
            raise TruncationError(f"q-series truncated at N={self.N} too early at z={z}")
        return val


@lru_cache(maxsize=None)
def _tau(N: int) -> tuple:
    """Ramanujan tau(1..N) from q prod (1 - q^k)^24 with exact integers."""
    poly = [0] * N  # coefficient of q^m for m = 0..N-1 of prod (1 - q^k)^24
    poly[0] = 1
    for k in range(1, N):
        for _ in range(24):
            for m in range(N - 1, k - 1, -1):
                poly[m] -= poly[m - k]
    return tuple(poly)


def delta_qexpansion(N: int = DEFAULT_TERMS) -> QExpansion:
    if N < 1:
        raise ParameterRangeError("N must be >= 1")
    return QExpansion(12, _tau(N))


def delta_cusp_form(z: complex, N: int = DEFAULT_TERMS) -> complex:
    """Delta(z) = q prod_{k<=N} (1 - q^k)^24; the dropped factors change log Delta by at
    most 24 |q|^{N+1} / (1 - |q|)^2."""
    z = complex(z)
    if z.imag <= MIN_IMAG:
        raise DomainError(f"Im z must exceed {MIN_IMAG}")
    if N < MIN_TERMS:
        raise ParameterRangeError(f"N must be >= {MIN_TERMS}")
    q = np.exp(2j * np.pi * z)
    aq = abs(q)
    tail = 24 * aq ** (N + 1) / (1 - aq) ** 2
    if math.expm1(tail) > TRUNCATION_TOL:
        raise TruncationError(f"product truncation error {tail:.3g} exceeds {TRUNCATION_TOL}; raise N")
    k = np.arange(1, N + 1)
    return complex(q * np.exp(24 * np.sum(np.log1p(-q**k))))


def _integrand_factory(f: QExpansion):
    def g(y, x):
        return y ** (f.weight - 2) * abs(f(complex(x, y))) ** 2
    return g


def petersson_norm_sq(f: QExpansion, rtol: float = 1e-10) -> float:
    """int over the standard fundamental domain of y^k |f|^2 dx dy / y^2 (adaptive 2-D quadrature,
    using the symmetry x -> -x)."""
    if f.weight < 12:
        raise ParameterRangeError("weight must be >= 12")
    g = _integrand_factory(f)
    val, err = integrate.dblquad(g, 0.0, 0.5, lambda x: math.sqrt(1 - x * x), lambda x: math.inf,
                                 epsabs=0.0, epsrel=rtol)
    val, err = 2 * val, 2 * err
    if not val > 0 or err > NORM_RTOL * val:
        raise AccuracyError(f"Petersson norm quadrature error {err:.3g} too large for value {val:.6g}")
    return val


@lru_cache(maxsize=1)
def delta_norm_sq() -> float:
    return petersson_norm_sq(delta_qexpansion(60))


def s_kappa_direct(z: complex, kappa: int = 12) -> float:
    """y^12 |Delta(z)|^2 / <Delta, Delta>: the whole weight-12 density since dim S_12 = 1."""
    if kappa != 12:
        raise ParameterRangeError("only kappa = 12 is available (dim S_12 = 1)")
    z = complex(z)
    return z.imag**12 * abs(delta_cusp_form(z)) ** 2 / delta_norm_sq()


def weighted_delta(Z) -> complex:
    """y^6 Delta(z) as a function of a 1x1 complex matrix."""
    z = complex(np.asarray(Z).reshape(-1)[0])
    return z.imag**6 * delta_cusp_form(z)


def eigen_check(points, kappa: int = 12, h: float = 1e-3):
    """Relative error of Delta^(kappa)(y^6 Delta) = (kappa/4)(kappa - 2) y^6 Delta at each point."""
    eig = kappa / 4 * (kappa - 2)
    out = []
    for z in points:
        Z = np.array([[complex(z)]])
        lhs = apply_maass_laplacian(weighted_delta, Z, kappa=kappa, h=h)
        rhs = eig * weighted_delta(Z)
        out.append(abs(lhs - rhs) / abs(rhs))
    return out


def fundamental_domain_grid(nx: int = 5, ny: int = 4, y_max: float = 2.5):
    """Points x + i y with |x| <= 1/2 and |z| >= 1, y up to y_max."""
    pts = []
    for x in np.linspace(-0.5, 0.5, nx):
        y0 = math.sqrt(1 - x * x)
        for y in np.linspace(y0 + 1e-9, y_max, ny):
            pts.append(complex(x, y))
    return pts
