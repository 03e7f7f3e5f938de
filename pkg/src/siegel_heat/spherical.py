"""Spherical functions of Sp(n, R) and Sp(n, C), and the radial part of K.

Two routes to the real spherical function phi_lambda:

* the Flensted-Jensen (FJ) route integrates the complex spherical kernel
  weyl(lambda, rho) / delta(rho) over the non-compact factor K_0\\K, with
  rho = rho(r, k) the radial part of k exp(r) conj(k)^T;
* the Harish-Chandra (HC) route averages exp((i lambda - rho0) H) over K_0 = U(n).

The FJ overall constant is fixed by phi_lambda(0) = 1 (exact at n = 1, Monte
Carlo calibrated for n >= 2, see calibration_constant).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numpy as np

from . import root_system as rs
from .errors import DomainError, NumericalError, ParameterRangeError, PrecisionWarning
from .integration import (
    QuadratureSpec,
    log_measure_normalization,
    mc_integrate,
    sample_hermitian_batch,
    sample_unitary,
)
from .symplectic_core import RadialVector, mobius, nak_diagonal

PAIRING_TOL = 1e-7
WALL_DIRECTION = np.array([1.0, 0.6180339887498949, 0.3819660112501051, 0.2360679774997897])
CALIBRATION_FILE = Path(__file__).with_name("calibration.json")


@dataclass(frozen=True)
class RadialPartResult:
    rho: RadialVector
    u_residual: float


@dataclass(frozen=True)
class WeightFactor:
    det_h: float
    kappa: float = 0.0

    @property
    def j_factor(self) -> float:
        return self.det_h ** (2 * self.kappa)


def _canon(r) -> np.ndarray:
    if isinstance(r, RadialVector):
        return r.r
    return RadialVector(r).r


def k_from_gl(g: np.ndarray) -> np.ndarray:
    """Image of g in GL_n(C) in K = Sp_n(C) cap O(2n, C): [[A, B], [-B, A]] with
    A + iB = g and A - iB = g^-T."""
    g = np.asarray(g, dtype=complex)
    gt = np.linalg.inv(np.swapaxes(g, -1, -2))
    A = (g + gt) / 2
    B = (g - gt) / 2j
    top = np.concatenate([A, B], axis=-1)
    return np.concatenate([top, np.concatenate([-B, A], axis=-1)], axis=-2)


def gl_from_k(k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=complex)
    n = k.shape[-1] // 2
    A, B = k[..., :n, :n], k[..., :n, n:]
    if np.max(np.abs(k[..., n:, n:] - A)) > 1e-9 or np.max(np.abs(k[..., n:, :n] + B)) > 1e-9:
        raise DomainError("k is not of the block form [[A, B], [-B, A]]")
    return A + 1j * B


def _check_orthogonal(k: np.ndarray):
    k = np.asarray(k, dtype=complex)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2:
        raise DomainError("k must be a 2n x 2n matrix")
    err = np.max(np.abs(k @ k.T - np.eye(k.shape[0])))
    if err > 1e-9 * max(1.0, float(np.max(np.abs(k))) ** 2):
        raise DomainError(f"k is not complex orthogonal (defect {err:.3g})")


def _radial_eigs(k: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of k exp(r) conj(k)^T, batched over leading axes of k."""
    er = np.exp(np.concatenate([r, -r], axis=-1))
    m = (k * er[..., None, :]) @ np.conj(np.swapaxes(k, -1, -2))
    m = (m + np.conj(np.swapaxes(m, -1, -2))) / 2
    return np.linalg.eigvalsh(m)


def radial_part(r, k) -> RadialPartResult:
    r = _canon(r)
    k = np.asarray(k, dtype=complex)
    _check_orthogonal(k)
    n = r.shape[0]
    if k.shape[0] != 2 * n:
        raise DomainError("dimension of k does not match r")
    er = np.exp(np.concatenate([r, -r]))
    m = (k * er) @ k.conj().T
    m = (m + m.conj().T) / 2
    w, u = np.linalg.eigh(m)
    if np.any(w <= 0):
        raise NumericalError("k exp(r) conj(k)^T is not positive definite")
    pairing = np.max(np.abs(np.log(w) + np.log(w[::-1])))
    if pairing > PAIRING_TOL * max(1.0, float(np.max(np.abs(np.log(w))))):
        raise NumericalError(f"eigenvalues are not reciprocal in pairs (defect {pairing:.3g})")
    rho = np.log(w[::-1][:n])
    residual = float(np.max(np.abs((u * w) @ u.conj().T - m)) / np.max(np.abs(m)))
    return RadialPartResult(RadialVector(np.maximum(rho, 0.0)), residual)


def weight_factor(k, kappa: float = 0.0) -> WeightFactor:
    """det of the Hermitian factor in k = k_0 k_h; in GL_n(C) terms |det(A + iB)|."""
    k = np.asarray(k, dtype=complex)
    _check_orthogonal(k)
    g = gl_from_k(k)
    return WeightFactor(float(abs(np.linalg.det(g))), kappa)


def weight_bound_diagnostics(k, r) -> dict:
    """Both sides of det h <= exp(sum |rho|) / prod ch r, the squared form used in
    the proof, the principal block M with det M = det(h)^2 prod ch r, and the
    interlacing of its eigenvalues with those of the full matrix."""
    r = _canon(r)
    k = np.asarray(k, dtype=complex)
    n = r.shape[0]
    det_h = weight_factor(k).det_h
    rho = radial_part(r, k).rho.r
    bound = math.exp(float(np.sum(np.abs(rho)))) / float(np.prod(np.cosh(r)))
    I = np.eye(n)
    l = (1 - 1j) / 2 * np.block([[I, -1j * I], [I, 1j * I]])
    er = np.exp(np.concatenate([r, -r]))
    full = l @ ((k * er) @ k.conj().T) @ np.linalg.inv(l)
    full = (full + full.conj().T) / 2
    M = full[:n, :n]
    ev_full = np.linalg.eigvalsh(full)
    ev_M = np.linalg.eigvalsh(M)
    tol = 1e-9 * ev_full[-1]
    interlaces = bool(np.all(ev_full[:n] <= ev_M + tol) and np.all(ev_M <= ev_full[n:] + tol))
    return {
        "det_h": det_h,
        "bound": bound,
        "squared_holds": det_h**2 <= bound * (1 + 1e-9),
        "holds": det_h <= bound * (1 + 1e-9),
        "det_M": float(np.linalg.det(M).real),
        "det_M_expected": det_h**2 * float(np.prod(np.cosh(r))),
        "interlaces": interlaces,
    }


def _wall_step(m: int) -> float:
    return 10.0 ** (-16.0 / (m + 2))


def _wall_direction(n: int) -> np.ndarray:
    if n <= WALL_DIRECTION.shape[0]:
        return WALL_DIRECTION[:n]
    return np.sqrt(np.arange(n, 0, -1) + 0.5)


# complex spherical function


def _complex_spherical_float(lam, r) -> float:
    n = lam.shape[0]
    num = rs.weyl_alternating_sum_real(lam, r)
    return float(rs.weyl_dimension_constant(n) * num / (rs.epsilon(lam) * rs.delta(2 * r)))


def _complex_spherical_mp(lam, r, m: int) -> float:
    n = lam.shape[0]
    with mpmath.workdps(30 + 12 * m):
        h = mpmath.mpf(10) ** (-10)
        v = [mpmath.mpf(x) for x in _wall_direction(n)]
        lam_mp = [mpmath.mpf(float(x)) for x in lam]
        r_mp = [mpmath.mpf(float(x)) for x in r]
        lam_wall = rs.vanishing_factors(lam) > 0
        r_wall = rs.vanishing_factors(r) > 0
        signs_l = (1, -1) if lam_wall else (0,)
        signs_r = (1, -1) if r_wall else (0,)
        total = mpmath.mpf(0)
        count = 0
        for a in signs_l:
            for b in signs_r:
                L = [lam_mp[j] + a * h * v[j] for j in range(n)]
                R = [r_mp[j] + b * h * v[::-1][j] for j in range(n)]
                total += _phi_mp(L, R)
                count += 1
        return float(total / count)


def _phi_mp(L, R):
    n = len(L)
    S = mpmath.matrix(n, n)
    for j in range(n):
        for k in range(n):
            S[j, k] = mpmath.sin(L[j] * R[k])
    sign = (-1) ** (n * (n - 1) // 2)
    num = sign * mpmath.mpf(2) ** n * mpmath.det(S)

    def eps(v):
        p = mpmath.mpf(1)
        for j in range(n):
            p *= v[j]
            for k in range(j + 1, n):
                p *= (v[j] + v[k]) * (v[j] - v[k])
        return p

    def dlt(v):
        p = mpmath.mpf(1)
        for j in range(n):
            p *= mpmath.sinh(v[j])
            for k in range(j + 1, n):
                p *= mpmath.sinh((v[j] + v[k]) / 2) * mpmath.sinh((v[j] - v[k]) / 2)
        return p

    rho0 = [mpmath.mpf(n - j) for j in range(n)]
    return eps(rho0) * num / (eps(L) * dlt([2 * x for x in R]))


def complex_spherical(lam, r) -> float:
    """Phi_lambda(exp r) on Sp_n(C), normalized to 1 at r = 0."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    r = _canon(r)
    if lam.shape[0] != r.shape[0]:
        raise DomainError("lambda and r have different lengths")
    if np.all(r == 0):
        return 1.0
    m_lam = rs.vanishing_factors(lam)
    m_r = rs.vanishing_factors(r)
    if m_lam == 0 and m_r == 0:
        return _complex_spherical_float(lam, r)
    m = m_lam + m_r
    if m_lam and m_r and 30 + 12 * m > 600:
        warnings.warn("lambda and r both on walls; fallback precision may be insufficient",
                      PrecisionWarning, stacklevel=2)
    return _complex_spherical_mp(lam, r, m)


# Flensted-Jensen route


def _lambda_stencil(lam: np.ndarray):
    """Evaluation points and weights for weyl(lambda, .)/tau(lambda) near walls."""
    m = rs.vanishing_factors(lam)
    if m == 0:
        return [lam], [1.0]
    h = _wall_step(m)
    v = _wall_direction(lam.shape[0])
    return [lam + h * v, lam - h * v], [0.5, 0.5]


def _rho_batch(batch, rs_grid: np.ndarray) -> np.ndarray:
    """rho(r, k_h) for each sample and each r; shape (m, q, n)."""
    n = batch.s.shape[1]
    h = (batch.U * np.exp(batch.s)[:, None, :]) @ np.conj(np.swapaxes(batch.U, -1, -2))
    k = k_from_gl(h)
    out = np.empty((len(batch), rs_grid.shape[0], n))
    for i, r in enumerate(rs_grid):
        w = _radial_eigs(k, r)
        out[:, i, :] = np.log(np.maximum(w[:, ::-1][:, :n], 1.0))
    return out


def fj_integrals(lams: np.ndarray, rs_grid: np.ndarray, spec: QuadratureSpec, kappa: float = 0.0):
    """Monte Carlo estimates of int_{K_0\\K} weyl(lambda, rho)/(i^{n^2} delta(rho)) tau(lambda)^-1
    det(h)^{2 kappa} dmu for every (lambda, r) pair on common samples.

    Returns (estimate, std_error), each of shape (len(lams), len(rs_grid)).
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    rs_grid = np.atleast_2d(np.asarray(rs_grid, dtype=float))
    n = lams.shape[1]
    stencils = [_lambda_stencil(lam) for lam in lams]
    log_norm = log_measure_normalization(n)

    def integrand(batch):
        rho = _rho_batch(batch, rs_grid)
        log_w = batch.log_weight + log_norm + 2 * kappa * batch.s.sum(axis=1)
        log_d = rs.log_abs_delta(rho)
        out = np.empty((len(batch), lams.shape[0] * rs_grid.shape[0]))
        col = 0
        for points, weights in stencils:
            for q in range(rs_grid.shape[0]):
                acc = np.zeros(len(batch))
                for lam, c in zip(points, weights):
                    weyl = rs.weyl_alternating_sum_real(lam, rho[:, q, :])
                    acc += c * weyl / rs.tau(lam)
                out[:, col] = acc * np.exp(log_w - log_d[:, q])
                col += 1
        return out

    def sampler(rng, m):
        return sample_hermitian_batch(n, m, spec.scale, rng)

    est, se = mc_integrate(integrand, sampler, spec)
    shape = (lams.shape[0], rs_grid.shape[0])
    return np.reshape(est, shape), np.reshape(se, shape)


def calibration_id(n: int) -> str:
    entry = calibration_constant(n)
    blob = json.dumps(entry, sort_keys=True).encode()
    return f"n{n}-" + hashlib.sha256(blob).hexdigest()[:12]


def _cache_path() -> Path:
    base = os.environ.get("SIEGEL_HEAT_CACHE", os.path.join(Path.home(), ".cache", "siegel_heat"))
    return Path(base) / "calibration.json"


def _load_calibrations() -> dict:
    table = {}
    for path in (CALIBRATION_FILE, _cache_path()):
        if path.exists():
            with open(path) as fh:
                table.update(json.load(fh))
    return table


CALIBRATION_LAMBDAS = {
    2: [(1.3, 0.4), (0.9, 0.2), (2.1, 0.7)],
    3: [(1.7, 0.9, 0.3), (2.3, 1.1, 0.5)],
}


def calibrate(n: int, spec: QuadratureSpec) -> dict:
    """Fit C_n in phi_lambda = C_n * I_lambda(r) by phi_lambda(0) = 1.

    I_lambda(0) / 1 must be the same constant for every lambda; we estimate it at
    several reference parameters on common samples and take the inverse-variance
    mean. The spread across lambda is returned as a consistency diagnostic.
    """
    if n == 1:
        return {"value": math.sqrt(2 / math.pi), "std_error": 0.0, "method": "exact"}
    lams = np.array(CALIBRATION_LAMBDAS[n], dtype=float)
    est, se = fj_integrals(lams, np.zeros((1, n)), spec)
    est, se = est[:, 0], se[:, 0]
    consts = 1.0 / est
    cse = se / est**2
    w = 1.0 / cse**2
    value = float(np.sum(w * consts) / np.sum(w))
    err = float(1.0 / math.sqrt(np.sum(w)))
    chi2 = float(np.sum(((consts - value) / cse) ** 2))
    return {"value": value, "std_error": err, "method": "monte_carlo", "seed": spec.seed,
            "samples": spec.samples, "scale": spec.scale, "lambdas": lams.tolist(),
            "per_lambda": consts.tolist(), "per_lambda_se": cse.tolist(), "chi2": chi2}


def calibration_constant(n: int) -> dict:
    if n == 1:
        return calibrate(1, QuadratureSpec())
    table = _load_calibrations()
    key = str(n)
    if key not in table:
        entry = calibrate(n, QuadratureSpec(samples=400_000, seed=20240607))
        path = _cache_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        cached = {}
        if path.exists():
            with open(path) as fh:
                cached = json.load(fh)
        cached[key] = entry
        with open(path, "w") as fh:
            json.dump(cached, fh, indent=2, sort_keys=True)
        table[key] = entry
    return table[key]


def _combine(value, se, const, const_se):
    val = const * value
    err = np.sqrt((const * se) ** 2 + (value * const_se) ** 2)
    return val, err


def real_spherical_fj_grid(lams, rs_grid, spec: QuadratureSpec):
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    cal = calibration_constant(lams.shape[1])
    est, se = fj_integrals(lams, rs_grid, spec)
    return _combine(est, se, cal["value"], cal["std_error"])


def real_spherical_fj(lam, r, spec: QuadratureSpec):
    """phi_lambda(exp r) by the FJ route; returns (value, std_error)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    r = _canon(r)
    if lam.shape[0] != r.shape[0]:
        raise DomainError("lambda and r have different lengths")
    if np.all(r == 0):
        return 1.0, 0.0
    val, err = real_spherical_fj_grid(lam[None, :], r[None, :], spec)
    return float(val[0, 0]), float(err[0, 0])


def max_convergent_weight(n: int) -> float:
    """The K-integral with det(h)^{2 kappa} converges only for kappa < (n+1)/2: along
    s = t (1, ..., 1) the kernel decays like exp(-n(n+1) t) and the weight grows like
    exp(2 kappa n t)."""
    return (n + 1) / 2


def weighted_spherical(lam, r, kappa: float, spec: QuadratureSpec):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    r = _canon(r)
    n = r.shape[0]
    if kappa < 0:
        raise ParameterRangeError("kappa must be nonnegative")
    if kappa >= max_convergent_weight(n):
        raise ParameterRangeError(
            f"the weighted K-integral diverges for kappa >= {max_convergent_weight(n)} at n = {n}")
    if kappa == 0:
        return real_spherical_fj(lam, r, spec)
    cal = calibration_constant(n)
    est, se = fj_integrals(lam[None, :], r[None, :], spec, kappa=kappa)
    val, err = _combine(est[0, 0], se[0, 0], cal["value"], cal["std_error"])
    return float(val), float(err)


# Harish-Chandra route


def _hc_integrand(lams: np.ndarray, W0: np.ndarray):
    """exp((i lambda - rho0) H) with H = -1/2 log D(Im(k0^-1 . W0)), per sample."""
    n = W0.shape[-1]
    rho0 = rs.RootSystemData(n).rho0

    def integrand(U):
        Ui = np.conj(np.swapaxes(U, -1, -2))
        A, B = Ui.real, Ui.imag
        W = mobius(A, B, -B, A, W0)
        H = -0.5 * np.log(nak_diagonal(W.imag))
        out = np.empty((U.shape[0], lams.shape[0]))
        for i, lam in enumerate(lams):
            out[:, i] = np.real(np.exp(H @ (1j * lam - rho0)))
        return out

    return integrand


def harish_chandra_phi_grid(lams, rs_grid, spec: QuadratureSpec):
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    rs_grid = np.atleast_2d(np.asarray(rs_grid, dtype=float))
    n = lams.shape[1]
    vals = np.empty((lams.shape[0], rs_grid.shape[0]))
    errs = np.empty_like(vals)
    for q, r in enumerate(rs_grid):
        W0 = 1j * np.diag(np.exp(-2 * r))
        est, se = mc_integrate(_hc_integrand(lams, W0), lambda rng, m: sample_unitary(n, rng, m), spec)
        vals[:, q], errs[:, q] = est, se
    return vals, errs


def harish_chandra_phi(lam, r, spec: QuadratureSpec):
    """phi_lambda(exp r) = E_{k0 in U(n)} exp((i lambda - rho0) H(exp(r) k0))."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    r = _canon(r)
    if np.all(r == 0):
        return 1.0, 0.0
    v, e = harish_chandra_phi_grid(lam[None, :], r[None, :], spec)
    return float(v[0, 0]), float(e[0, 0])


def harish_chandra_phi_at(lam, Z, spec: QuadratureSpec):
    """phi_lambda at a general point Z of H_n.

    Uses H(g^-1 k0) with g . i = Z, for which every sample is itself an eigenfunction
    of the Laplacian in Z; the average has the same law as harish_chandra_phi at
    the radial coordinates of Z (conjugation by J in K_0).
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[0]
    rho0 = rs.RootSystemData(n).rho0

    def integrand(U):
        Ui = np.conj(np.swapaxes(U, -1, -2))
        A, B = Ui.real, Ui.imag
        W = mobius(A, B, -B, A, Z)
        logD = np.log(nak_diagonal(W.imag))
        return np.exp(logD @ ((rho0 - 1j * lam) / 2))

    est, se = mc_integrate(integrand, lambda rng, m: sample_unitary(n, rng, m), spec)
    return complex(est), float(se)


# c-function identity


def c_function_integrals(lams, spec: QuadratureSpec):
    """|pi0(lambda)|^2 int_{K_0\\K} Phi_{2 lambda}(k) dmu for each row of lams, on common
    samples. Returns (estimate, std_error).

    k = k_0 exp(H) k_0' in the complex group gives k conj(k)^T = k_0 exp(2H) k_0^-1, so
    Phi_{2 lambda}(k) is the complex spherical function at rho(0, k) / 2.
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    n = lams.shape[1]
    if np.any([rs.vanishing_factors(lam) for lam in lams]):
        raise ParameterRangeError("lambda must be regular")
    log_norm = log_measure_normalization(n)
    eps0 = rs.weyl_dimension_constant(n)
    pi0_sq = rs.pi0(lams) ** 2

    def integrand(batch):
        rho = _rho_batch(batch, np.zeros((1, n)))[:, 0, :] / 2
        w = np.exp(batch.log_weight + log_norm - rs.log_abs_delta(2 * rho))
        sgn = np.sign(rs.delta(2 * rho))
        out = np.empty((len(batch), lams.shape[0]))
        for i, lam in enumerate(lams):
            num = rs.weyl_alternating_sum_real(2 * lam, rho)
            out[:, i] = pi0_sq[i] * eps0 * num * sgn * w / rs.epsilon(2 * lam)
        return out

    def sampler(rng, m):
        return sample_hermitian_batch(n, m, spec.scale, rng)

    return mc_integrate(integrand, sampler, spec)


def c_function_check(lams, spec: QuadratureSpec, lam_ref) -> dict:
    """Calibrate the identity |c(lambda)|^-2 = const * |pi0|^2 int Phi_{2 lambda} at lam_ref,
    then compare with the closed form at each lambda in lams."""
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    ref = np.atleast_2d(np.asarray(lam_ref, dtype=float))
    est, se = c_function_integrals(np.vstack([ref, lams]), spec)
    const = float(rs.c_inverse_sq(ref[0]) / est[0])
    const_rel = float(se[0] / est[0])
    closed = rs.c_inverse_sq(lams)
    value = const * est[1:]
    rel_se = np.sqrt((se[1:] / est[1:]) ** 2 + const_rel**2)
    return {"constant": const, "constant_rel_se": const_rel, "lams": lams, "value": value,
            "closed_form": closed, "relative_error": np.abs(value / closed - 1), "relative_se": rel_se}
