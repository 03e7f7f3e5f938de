"""Heat kernels on H_n as functions of the radial coordinates.

All kernels share one constant with the FJ spherical function: inverting the
spherical transform with |c(lambda)|^-2 = pi^{-n^2/2} 2^{-n^2} epsilon(lambda)
tau(lambda) turns the lambda-integral of epsilon(lambda) exp(i <lambda, rho>)
exp(-|lambda|^2 t/4) into a Gaussian in rho, giving

    K_t(r) = C_n pi^{(n - n^2)/2} 2^n t^{-n^2 - n/2} exp(-sum j^2 t/4)
             * int_{K_0\\K} epsilon(rho) exp(-|rho|^2/t) / delta(rho) dmu.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import root_system as rs
from .errors import AccuracyWarning, DomainError, ParameterRangeError
from .integration import QuadratureSpec, log_measure_normalization, mc_integrate, sample_hermitian_batch
from .spherical import _rho_batch, calibration_constant
from .symplectic_core import RadialVector

SPECTRAL_MIN_T = 0.1
SPECTRAL_CUTOFF = 12.0
WARN_RELATIVE_ERROR = 0.2
NODE_BLOCK = 64


@dataclass(frozen=True)
class HeatKernelQuery:
    n: int
    t: float
    r: RadialVector
    kappa: float = 0.0
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterRangeError("t must be positive")
        r = self.r if isinstance(self.r, RadialVector) else RadialVector(self.r)
        if r.n != self.n:
            raise DomainError(f"r has {r.n} coordinates, expected {self.n}")
        if self.kappa < 0:
            raise ParameterRangeError("kappa must be nonnegative")
        object.__setattr__(self, "r", r)


def log_prefactor(n: int, t: float) -> float:
    sq = n * (n + 1) * (2 * n + 1) / 6
    return ((n - n * n) / 2 * math.log(math.pi) + n * math.log(2.0)
            - (n * n + n / 2) * math.log(t) - sq * t / 4)


def _rho_n1(s: np.ndarray, r: np.ndarray) -> np.ndarray:
    """n = 1: cosh rho = cosh(2s) cosh r; shape (len(s), len(r), 1)."""
    x = np.cosh(2 * s)[:, None] * np.cosh(r)[None, :]
    return np.arccosh(x)[..., None]


def _integrals(n: int, rs_grid: np.ndarray, spec: QuadratureSpec, log_g, s_extent: float):
    """E over K_0\\K of exp(log_g(rho)) with dmu normalized by (2 pi)^{-n^2/2}.

    log_g maps rho of shape (m, q, n) to (m, q); returns (estimate, std_error) of shape (q,).
    For n = 1 and a quadrature method the one-dimensional integral over s is done
    with Gauss-Legendre on [0, s_extent].
    """
    log_norm = log_measure_normalization(n)
    if n == 1 and spec.method == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(spec.points)
        s = s_extent / 2 * (x + 1)
        w = s_extent / 2 * w
        vals = np.exp(log_g(_rho_n1(s, rs_grid[:, 0])) + log_norm)
        est = 2 * np.sum(w[:, None] * vals, axis=0)
        return est, np.zeros_like(est)
    if spec.method != "monte_carlo":
        raise ParameterRangeError(f"method {spec.method} is not available for n = {n}")

    def integrand(batch):
        rho = _rho_batch(batch, rs_grid)
        return np.exp(log_g(rho) + (batch.log_weight + log_norm)[:, None])

    return mc_integrate(integrand, lambda rng, m: sample_hermitian_batch(n, m, spec.scale, rng), spec)


def _log_eps_over_delta(rho):
    eps = rs.epsilon(rho)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(eps)) - rs.log_abs_delta(rho)


def _finish(n, log_pref, est, se, warn=True):
    cal = calibration_constant(n)
    c, c_se = cal["value"], cal["std_error"]
    scale = np.exp(log_pref)
    value = c * scale * est
    err = scale * np.sqrt((c * se) ** 2 + (est * c_se) ** 2)
    if warn:
        # an underflowed value with zero error is an exact zero, not an accuracy problem
        rel = np.where(value > 0, err / np.where(value > 0, value, 1.0), np.where(err > 0, np.inf, 0.0))
        if np.any(rel > WARN_RELATIVE_ERROR):
            warnings.warn(f"relative standard error {float(np.max(rel)):.2g} exceeds "
                          f"{WARN_RELATIVE_ERROR}", AccuracyWarning, stacklevel=3)
    return value, err


def heat_kernel_fj_grid(n: int, t: float, rs_grid, spec: QuadratureSpec):
    rs_grid = np.atleast_2d(np.asarray(rs_grid, dtype=float))
    if not t > 0:
        raise ParameterRangeError("t must be positive")

    def log_g(rho):
        return _log_eps_over_delta(rho) - np.sum(rho**2, axis=-1) / t

    extent = math.sqrt(40 * t) + float(np.max(rs_grid)) + 1.0
    est, se = _integrals(n, rs_grid, spec, log_g, extent)
    return _finish(n, log_prefactor(n, t), est, se)


def heat_kernel_fj(q: HeatKernelQuery):
    if q.kappa != 0:
        raise ParameterRangeError("heat_kernel_fj is the weight-0 kernel; use heat_kernel_weighted_bound")
    v, e = heat_kernel_fj_grid(q.n, q.t, q.r.r[None, :], q.spec)
    return float(v[0]), float(e[0])


def spectral_nodes(n: int, t: float, points: int):
    """Tensor Gauss-Legendre nodes on [0, 12/sqrt t]^n with weights divided by n!,
    which integrates a W-invariant function over the chamber a^v/W."""
    L = SPECTRAL_CUTOFF / math.sqrt(t)
    x, w = np.polynomial.legendre.leggauss(points)
    x = L / 2 * (x + 1)
    w = L / 2 * w
    grids = np.meshgrid(*([x] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1) / math.factorial(n)
    return nodes, weights


def heat_kernel_spectral_grid(n: int, t: float, rs_grid, spec: QuadratureSpec, points: int = 0):
    """int over a^v/W of exp(lambda_omega t) phi_lambda(r) |c(lambda)|^-2 d lambda.

    phi_lambda |c|^-2 = C_n pi^{-n^2/2} 2^{-n^2} epsilon(lambda) I_lambda(r): tau cancels,
    so the lambda-quadrature is applied sample by sample to the FJ integrand.
    """
    if t < SPECTRAL_MIN_T:
        raise ParameterRangeError(f"spectral route needs t >= {SPECTRAL_MIN_T}; truncation is unreliable below")
    rs_grid = np.atleast_2d(np.asarray(rs_grid, dtype=float))
    points = points or (256 if n == 1 else 48)
    nodes, weights = spectral_nodes(n, t, points)
    node_w = weights * np.exp(rs.casimir_eigenvalue(nodes) * t) * rs.epsilon(nodes)
    keep = np.abs(node_w) > 1e-300
    nodes, node_w = nodes[keep], node_w[keep]
    log_norm = log_measure_normalization(n)

    def integrand(batch):
        rho = _rho_batch(batch, rs_grid)
        out = np.empty((len(batch), rs_grid.shape[0]))
        for qi in range(rs_grid.shape[0]):
            p = rho[:, qi, :]
            acc = np.zeros(len(batch))
            if n == 1:
                acc = 2 * np.sin(p[:, :1] * nodes[None, :, 0]) @ node_w
            for lo in range(0, nodes.shape[0] if n > 1 else 0, NODE_BLOCK):
                blk = slice(lo, lo + NODE_BLOCK)
                weyl = rs.weyl_alternating_sum_real(nodes[None, blk, :], p[:, None, :])
                acc += weyl @ node_w[blk]
            out[:, qi] = acc * np.exp(batch.log_weight + log_norm - rs.log_abs_delta(p))
        return out

    if spec.method != "monte_carlo":
        raise ParameterRangeError("spectral route uses Monte Carlo over K_0\\K")
    est, se = mc_integrate(integrand, lambda rng, m: sample_hermitian_batch(n, m, spec.scale, rng), spec)
    log_pref = -(n * n / 2) * math.log(math.pi) - n * n * math.log(2.0)
    return _finish(n, log_pref, est, se)


def heat_kernel_spectral(q: HeatKernelQuery, points: int = 0):
    if q.kappa != 0:
        raise ParameterRangeError("spectral route is for weight 0")
    v, e = heat_kernel_spectral_grid(q.n, q.t, q.r.r[None, :], q.spec, points)
    return float(v[0]), float(e[0])


def heat_kernel_weighted_bound_grid(n: int, t: float, rs_grid, kappa: float, spec: QuadratureSpec,
                                    log_scale: float = 0.0):
    """Upper bound for the weight-kappa kernel: the weight factor det(h)^{2 kappa} is
    replaced by (exp(sum |rho|) / prod ch r)^kappa. Evaluated in log space; the result
    is multiplied by exp(log_scale) inside the integrand so that large t does not overflow."""
    if kappa < n + 1:
        raise ParameterRangeError(f"weighted bound needs kappa >= n + 1 = {n + 1}")
    if not t > 0:
        raise ParameterRangeError("t must be positive")
    rs_grid = np.atleast_2d(np.asarray(rs_grid, dtype=float))
    log_ch = np.sum(np.log(np.cosh(rs_grid)), axis=-1)

    def log_g(rho):
        return (_log_eps_over_delta(rho) - np.sum(rho**2 / t - kappa * np.abs(rho), axis=-1)
                - kappa * log_ch[None, :] + log_scale)

    extent = kappa * t / 4 + math.sqrt(40 * t) + float(np.max(rs_grid)) + 1.0
    est, se = _integrals(n, rs_grid, spec, log_g, extent)
    return _finish(n, log_prefactor(n, t), est, se)


def heat_kernel_weighted_bound(q: HeatKernelQuery):
    v, e = heat_kernel_weighted_bound_grid(q.n, q.t, q.r.r[None, :], q.kappa, q.spec)
    return float(v[0]), float(e[0])


def heat_kernel_weighted_fj(q: HeatKernelQuery, with_bound: bool = False):
    """The weight-kappa kernel in FJ form: det(h)^{2 kappa} inside the Gaussian-damped
    K-integral. With with_bound, also returns the bound on the same samples and the
    largest per-sample ratio (weighted term / bound term)."""
    n, t, kappa = q.n, q.t, q.kappa
    r = q.r.r
    log_ch = float(np.sum(np.log(np.cosh(r))))
    log_norm = log_measure_normalization(n)
    spec = q.spec
    worst = [0.0]

    def integrand(batch):
        rho = _rho_batch(batch, r[None, :])[:, 0, :]
        base = _log_eps_over_delta(rho) - np.sum(rho**2, axis=-1) / t + batch.log_weight + log_norm
        weighted = base + 2 * kappa * batch.s.sum(axis=1)
        bound = base + kappa * (np.sum(np.abs(rho), axis=-1) - log_ch)
        worst[0] = max(worst[0], float(np.max(np.exp(weighted - bound))))
        return np.stack([np.exp(weighted), np.exp(bound)], axis=-1)

    est, se = mc_integrate(integrand, lambda rng, m: sample_hermitian_batch(n, m, spec.scale, rng), spec)
    value, err = _finish(n, log_prefactor(n, t), est, se, warn=False)
    if with_bound:
        return (float(value[0]), float(err[0])), (float(value[1]), float(err[1])), worst[0]
    return float(value[0]), float(err[0])


def classical_h2_heat_kernel(d: float, t: float) -> float:
    """Heat kernel of the hyperbolic plane (curvature -1) at distance d, time t:
    sqrt2 (4 pi t)^{-3/2} e^{-t/4} int_d^inf s e^{-s^2/4t} / sqrt(ch s - ch d) ds.

    Substituting s = d + u^2 removes the endpoint singularity; ch s - ch d is written
    as 2 sh((s + d)/2) sh(u^2/2) to avoid cancellation.
    """
    if d < 0 or not t > 0:
        raise ParameterRangeError("need d >= 0 and t > 0")

    def f(u):
        if u == 0.0:
            return 2.0 * d * math.exp(-d * d / (4 * t)) / math.sqrt(math.sinh(d)) if d > 0 else 0.0
        s = d + u * u
        log_den = 0.5 * (math.log(2.0) + _log_sinh((s + d) / 2) + _log_sinh(u * u / 2))
        return 2 * u * s * math.exp(-s * s / (4 * t) - log_den)

    upper = math.sqrt(max(1.0, 2 * math.sqrt(60 * t) + 4))
    val, _ = integrate.quad(f, 0.0, upper, limit=200, epsabs=0, epsrel=1e-11)
    tail, _ = integrate.quad(f, upper, np.inf, limit=200, epsabs=0, epsrel=1e-11)
    return math.sqrt(2.0) * (4 * math.pi * t) ** -1.5 * math.exp(-t / 4) * (val + tail)


def _log_sinh(x: float) -> float:
    if x > 20:
        return x - math.log(2.0)
    return math.log(math.sinh(x))


H2_REFERENCE = {"a": 2.0, "b": 1.0, "amplitude": 4 * math.sqrt(math.pi)}


def fit_h2_parametrization(rs_values=(0.0, 0.25, 0.5, 0.75, 1.0, 1.5), ts=(0.5, 1.0, 2.0),
                           points: int = 400) -> dict:
    """Least-squares fit of K(r, t) = amplitude * K_H2(a r, b t) at n = 1, with K from
    the FJ formula by deterministic quadrature. Returns the fit and its residual."""
    spec = QuadratureSpec(method="gauss_legendre", points=points)
    rs_values = np.asarray(rs_values, dtype=float)
    data = []
    for t in ts:
        v, _ = heat_kernel_fj_grid(1, t, rs_values[:, None], spec)
        data.extend((r, t, val) for r, val in zip(rs_values, v))

    def resid(p):
        a, b, amp = p
        return [math.log(amp * classical_h2_heat_kernel(a * r, b * t)) - math.log(val) for r, t, val in data]

    sol = optimize.least_squares(resid, x0=[1.5, 1.3, 5.0], x_scale=[1, 1, 5], xtol=1e-13, ftol=1e-13)
    a, b, amp = sol.x
    return {"a": float(a), "b": float(b), "amplitude": float(amp),
            "max_log_residual": float(np.max(np.abs(sol.fun))), "points": len(data)}
