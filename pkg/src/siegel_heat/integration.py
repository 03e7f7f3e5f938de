"""Quadrature, Gaussian moments and Monte Carlo over K_0 = U(n) and K_0\\K."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import NumericalError, ParameterRangeError

METHODS = ("gauss_legendre", "gauss_hermite", "monte_carlo")
CHUNK = 1 << 15


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "monte_carlo"
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    scale: float = 1.0
    points: int = 64

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterRangeError(f"unknown quadrature method {self.method!r}")
        if self.samples < 2 or self.points < 1:
            raise ParameterRangeError("samples must be >= 2 and points >= 1")
        if self.workers < 1:
            raise ParameterRangeError("workers must be >= 1")
        if not self.scale > 0:
            raise ParameterRangeError("scale must be positive")
        if not 0 <= self.seed < 2**64:
            raise ParameterRangeError("seed must be a 64-bit unsigned integer")

    def with_seed(self, seed: int) -> "QuadratureSpec":
        return replace(self, seed=seed)


def gaussian_moment(m: int) -> float:
    """int x^m exp(-x^2) dx over the real line."""
    if m < 0:
        raise ParameterRangeError("moment order must be nonnegative")
    if m % 2:
        return 0.0
    return math.gamma((m + 1) / 2)


def sample_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar unitary matrices via QR of a complex Ginibre matrix with phase fix."""
    shape = (n, n) if size is None else (size, n, n)
    G = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def unitary_to_symplectic(U: np.ndarray) -> np.ndarray:
    A, B = U.real, U.imag
    top = np.concatenate([A, B], axis=-1)
    bottom = np.concatenate([-B, A], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


@dataclass(frozen=True)
class HermitianSample:
    h: np.ndarray
    log_weight: float


@dataclass(frozen=True)
class HermitianBatch:
    """h = U diag(exp(s)) U^* for a batch; log_weight = log(invariant density / proposal)."""

    s: np.ndarray
    U: np.ndarray
    log_weight: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return (self.U * np.exp(self.s)[..., None, :]) @ np.conj(np.swapaxes(self.U, -1, -2))

    def __len__(self):
        return self.s.shape[0]


def log_measure_normalization(n: int) -> float:
    """(2 pi)^{-d/2} with d = n^2 the real dimension of K_0\\K."""
    return -0.5 * n * n * math.log(2 * math.pi)


def _log_weyl_integration_constant(n: int) -> float:
    """Lebesgue measure on Hermitian matrices in eigen-coordinates.

    dH = 2^{n(n-1)/2} pi^{n(n-1)/2} / prod_{j=1}^n j! * prod_{i<j}(x_i - x_j)^2 dx dU
    for entries measured as (H_jj, Re H_jk, Im H_jk) with Frobenius volume.
    """
    m = n * (n - 1) / 2
    return m * math.log(2.0) + m * math.log(math.pi) - float(sum(gammaln(j + 1) for j in range(1, n + 1)))


def _log_sinh_abs(x):
    x = np.abs(x)
    return x + np.log1p(-np.exp(-2 * x)) - math.log(2.0)


def sample_hermitian_batch(n: int, m: int, scale: float, rng: np.random.Generator) -> HermitianBatch:
    """Draw m Hermitian factors h = exp(S) of K_0\\K.

    Eigenvalues of S are i.i.d. Laplace(scale) and eigenvectors Haar. The weight
    converts to the invariant measure of the coset K_0 k_h, written in S: the coset
    is determined by h^* h = exp(2S), whose invariant density in S is
    prod_{i<j} sh^2(s_i - s_j) up to a constant. The (2 pi)^{-n^2/2} normalization
    is left out (see log_measure_normalization).
    """
    if not scale > 0:
        raise ParameterRangeError("scale must be positive")
    s = rng.laplace(0.0, scale, size=(m, n))
    U = sample_unitary(n, rng, size=m)
    log_prop = np.sum(-np.abs(s) / scale - math.log(2 * scale), axis=1)
    log_jac = np.zeros(m)
    for i in range(n):
        for j in range(i + 1, n):
            log_jac += 2 * _log_sinh_abs(s[:, i] - s[:, j])
    log_jac = log_jac + _log_weyl_integration_constant(n)
    return HermitianBatch(s=s, U=U, log_weight=log_jac - log_prop)


def sample_hermitian_factor(n: int, scale: float, rng: np.random.Generator) -> HermitianSample:
    batch = sample_hermitian_batch(n, 1, scale, rng)
    h = batch.h[0]
    return HermitianSample(h=(h + h.conj().T) / 2, log_weight=float(batch.log_weight[0]))


def _nodes(spec: QuadratureSpec, a: float, b: float):
    if spec.method == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(spec.points)
        return (b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w
    raise ParameterRangeError(f"no nodes for method {spec.method}")


def integrate_1d(f: Callable, spec: QuadratureSpec, domain=(0.0, 1.0)):
    """int f over domain. Hermite integrates over the real line, dividing out exp(-x^2)
    internally; Monte Carlo samples uniformly on a finite domain."""
    if spec.method == "gauss_hermite":
        x, w = np.polynomial.hermite.hermgauss(spec.points)
        vals = np.asarray(f(x))
        _check_finite(vals, x)
        return np.sum(np.exp(np.log(w) + x**2) * vals, axis=-1)
    a, b = map(float, domain)
    if spec.method == "gauss_legendre":
        x, w = _nodes(spec, a, b)
        vals = np.asarray(f(x))
        _check_finite(vals, x)
        return np.sum(w * vals, axis=-1)

    def sampler(rng, m):
        return rng.uniform(a, b, size=m)

    est, _ = mc_integrate(lambda x: (b - a) * np.asarray(f(x)), sampler, spec)
    return est


def _check_finite(vals, where, context=""):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise NumericalError(f"integrand is not finite at index {tuple(idx)}{context}; "
                             f"sample {np.asarray(where)[idx[0]] if np.ndim(where) else where!r}")


def _worker_sums(f, sampler, count, seed_seq, worker):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    total = None
    total_sq = None
    done = 0
    chunk_id = 0
    while done < count:
        m = min(CHUNK, count - done)
        batch = sampler(rng, m)
        vals = np.asarray(f(batch))
        if vals.shape[:1] != (m,):
            raise NumericalError(f"integrand returned shape {vals.shape} for {m} samples")
        if not np.all(np.isfinite(vals)):
            idx = int(np.argwhere(~np.isfinite(vals))[0][0])
            raise NumericalError(f"integrand is not finite: worker {worker}, chunk {chunk_id}, "
                                 f"sample {done + idx}")
        s = vals.sum(axis=0)
        sq = (np.abs(vals) ** 2).sum(axis=0)
        total = s if total is None else total + s
        total_sq = sq if total_sq is None else total_sq + sq
        done += m
        chunk_id += 1
    return total, total_sq


def mc_integrate(f: Callable, sampler: Callable, spec: QuadratureSpec):
    """Monte Carlo mean of f over draws of sampler(rng, m).

    f may return shape (m,) or (m, q) for q integrands on common samples. Worker w
    draws from the w-th spawned child of SeedSequence(seed); partial sums are combined
    in worker order, so equal (seed, workers, samples) give bit-identical results.
    """
    N = spec.samples
    W = spec.workers
    counts = [N // W + (1 if w < N % W else 0) for w in range(W)]
    children = np.random.SeedSequence(spec.seed).spawn(W)
    jobs = [(counts[w], children[w], w) for w in range(W) if counts[w]]
    if W == 1:
        parts = [_worker_sums(f, sampler, c, ss, w) for c, ss, w in jobs]
    else:
        with ThreadPoolExecutor(max_workers=W) as pool:
            futures = [pool.submit(_worker_sums, f, sampler, c, ss, w) for c, ss, w in jobs]
            parts = [fut.result() for fut in futures]
    total = parts[0][0]
    total_sq = parts[0][1]
    for s, sq in parts[1:]:
        total = total + s
        total_sq = total_sq + sq
    mean = total / N
    var = np.maximum(total_sq / N - np.abs(mean) ** 2, 0.0) * N / (N - 1)
    return mean, np.sqrt(var / N)
