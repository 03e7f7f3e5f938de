"""Type C_n root data and the special functions built from it.

Every evaluator accepts arrays whose last axis has length n and broadcasts over
the leading axes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

WALL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class RootSystemData:
    n: int

    @cached_property
    def positive_roots(self) -> np.ndarray:
        n = self.n
        roots = [2 * np.eye(n)[j] for j in range(n)]
        for j, k in itertools.combinations(range(n), 2):
            roots.append(np.eye(n)[j] + np.eye(n)[k])
            roots.append(np.eye(n)[j] - np.eye(n)[k])
        return np.array(roots)

    @property
    def rho0(self) -> np.ndarray:
        return np.arange(self.n, 0, -1, dtype=float)

    @property
    def pairing_scale(self) -> float:
        return 1.0 / (4 * (self.n + 1))

    def pairing(self, u, v) -> float:
        return float(np.dot(u, v)) * self.pairing_scale

    def weyl_group(self):
        """All signed permutations as (perm, signs, det)."""
        n = self.n
        for perm in itertools.permutations(range(n)):
            parity = _permutation_sign(perm)
            for signs in itertools.product((1, -1), repeat=n):
                yield np.array(perm), np.array(signs), parity * int(np.prod(signs))

    @property
    def weyl_order(self) -> int:
        return 2**self.n * int(np.prod(np.arange(1, self.n + 1)))


def _permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class SpectralParameter:
    lam: np.ndarray = field()

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam))
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.lam) and bool(np.any(self.lam.imag != 0))

    @property
    def eigenvalue(self):
        return casimir_eigenvalue(self.lam)


def _pairs(n):
    return list(itertools.combinations(range(n), 2))


def _root_values(v: np.ndarray) -> np.ndarray:
    """Coroot pairings of v: v_j, then v_j + v_k and v_j - v_k for j < k."""
    v = np.asarray(v)
    n = v.shape[-1]
    parts = [v]
    for j, k in _pairs(n):
        parts.append((v[..., j] + v[..., k])[..., None])
        parts.append((v[..., j] - v[..., k])[..., None])
    return np.concatenate(parts, axis=-1)


def epsilon(v):
    """prod v_j * prod_{j<k} (v_j + v_k)(v_j - v_k)."""
    return np.prod(_root_values(v), axis=-1)


def _half_root_values(v: np.ndarray) -> np.ndarray:
    """Root values halved: v_j (for 2e_j / 2) and (v_j +- v_k)/2."""
    v = np.asarray(v)
    n = v.shape[-1]
    parts = [v]
    for j, k in _pairs(n):
        parts.append(((v[..., j] + v[..., k]) / 2)[..., None])
        parts.append(((v[..., j] - v[..., k]) / 2)[..., None])
    return np.concatenate(parts, axis=-1)


def delta(v):
    """prod sh(v_j) * prod_{j<k} sh((v_j + v_k)/2) sh((v_j - v_k)/2)."""
    return np.prod(np.sinh(_half_root_values(v)), axis=-1)


def log_abs_delta(v):
    return np.sum(_log_abs_sinh(_half_root_values(v)), axis=-1)


def _log_abs_sinh(x):
    x = np.abs(x)
    return x + np.log1p(-np.exp(-2 * x)) - np.log(2.0)


def nu(v):
    """prod ch(v_j) * prod_{j<k} ch((v_j + v_k)/2) ch((v_j - v_k)/2)."""
    return np.prod(np.cosh(_half_root_values(v)), axis=-1)


def tau(lam):
    """prod th(pi lam_j / 2) * prod_{j<k} th(pi (lam_j +- lam_k) / 2)."""
    return np.prod(np.tanh(np.pi * _root_values(lam) / 2), axis=-1)


def pi0(lam):
    n = np.shape(lam)[-1]
    return 2.0**n * epsilon(lam) / (4.0 * (n + 1)) ** (n * n)


def c_inverse_sq(lam):
    """|c(lambda)|^-2 as the product over positive roots of
    (x/2) th(pi x/2) / sqrt(pi), x the coroot pairing."""
    x = _root_values(np.asarray(lam, dtype=float))
    return np.prod(x / 2 * np.tanh(np.pi * x / 2) / np.sqrt(np.pi), axis=-1)


def c_inverse_sq_reduced(lam):
    """Same quantity through epsilon and tau."""
    n = np.shape(lam)[-1]
    return np.pi ** (-n * n / 2) * 2.0 ** (-n * n) * epsilon(lam) * tau(lam)


def sine_matrix(lam, r):
    lam = np.asarray(lam)
    r = np.asarray(r)
    return np.sin(lam[..., :, None] * r[..., None, :])


def weyl_alternating_sum(lam, r):
    """sum over signed permutations of det(sigma) exp(i <sigma lam, r>) = det(2i sin(lam_j r_k))."""
    n = np.shape(lam)[-1]
    return (2j) ** n * np.linalg.det(sine_matrix(lam, r))


def weyl_alternating_sum_real(lam, r):
    """weyl_alternating_sum / i^(n^2), which is real."""
    n = np.shape(lam)[-1]
    sign = (-1) ** (n * (n - 1) // 2)
    return sign * 2.0**n * np.linalg.det(sine_matrix(lam, r))


def weyl_alternating_sum_brute(lam, r) -> complex:
    """Explicit sum over all 2^n n! signed permutations (oracle)."""
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    total = 0j
    for perm, signs, det in RootSystemData(lam.shape[0]).weyl_group():
        total += det * np.exp(1j * np.dot(signs * lam[perm], r))
    return total


def casimir_eigenvalue(lam):
    lam = np.asarray(lam)
    n = lam.shape[-1]
    return -(n * (n + 1) * (2 * n + 1) / 6 + np.sum(lam**2, axis=-1)) / 4


def rho0_pairing(n: int) -> float:
    return n * (n + 1) * (2 * n + 1) / 6 / (4 * (n + 1))


def weyl_dimension_constant(n: int) -> float:
    """epsilon(rho0): the normalization making the complex spherical function 1 at r = 0."""
    return float(epsilon(RootSystemData(n).rho0))


def vanishing_factors(v, threshold: float = WALL_THRESHOLD) -> int:
    """Number of root values of v below threshold in absolute value."""
    return int(np.sum(np.abs(_root_values(np.asarray(v, dtype=float))) < threshold))
