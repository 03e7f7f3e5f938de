"""Minkowski reduction of positive quadratic forms and Siegel reduction on H_n."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError
from .symplectic_core import SiegelPoint, SymplecticMatrix, act

MAX_MINKOWSKI_DEGREE = 4
MAX_SIEGEL_DEGREE = 3
ENUM_RADIUS = 5
TOL = 1e-12


@dataclass(frozen=True)
class ReductionResult:
    Z_reduced: SiegelPoint
    gamma: SymplecticMatrix
    steps: int
    # the inversion candidates form a finite, heuristic generator list
    generator_list: str = "heuristic: subset inversions with translations in {-1,0,1}"


class ReductionConvergenceError(ConvergenceError):
    def __init__(self, message, partial: ReductionResult):
        super().__init__(message)
        self.partial = partial


@lru_cache(maxsize=None)
def _box(n: int, radius: int) -> np.ndarray:
    pts = np.array(list(itertools.product(range(-radius, radius + 1), repeat=n)), dtype=np.int64)
    return pts[np.any(pts != 0, axis=1)]


def _gcd_tail(V: np.ndarray, k: int) -> np.ndarray:
    g = np.zeros(V.shape[0], dtype=np.int64)
    for j in range(k, V.shape[1]):
        g = np.gcd(g, V[:, j])
    return g


@lru_cache(maxsize=None)
def _primitive_candidates(n: int, k: int, radius: int) -> np.ndarray:
    V = _box(n, radius)
    return V[_gcd_tail(V, k) == 1]


def _complete_column(w: np.ndarray) -> np.ndarray:
    """Unimodular integer matrix whose first column is the primitive vector w."""
    m = w.shape[0]
    A = np.eye(m, dtype=np.int64)
    v = w.astype(np.int64).copy()
    # reduce v to +-e_1 by integer row operations recorded in A (A w = v)
    while np.count_nonzero(v) > 1 or v[0] == 0:
        nz = np.nonzero(v)[0]
        p = nz[np.argmin(np.abs(v[nz]))]
        for j in nz:
            if j != p:
                q = v[j] // v[p]
                v[j] -= q * v[p]
                A[j] -= q * A[p]
        if np.count_nonzero(v) == 1 and v[0] == 0:
            p = np.nonzero(v)[0][0]
            v[[0, p]] = v[[p, 0]]
            A[[0, p]] = A[[p, 0]]
    if v[0] < 0:
        v[0] = -v[0]
        A[0] = -A[0]
    M = np.rint(np.linalg.inv(A)).astype(np.int64)
    assert np.array_equal(M[:, 0], w)
    return M


def _size_reduce(Y: np.ndarray, U: np.ndarray):
    """Pairwise reduction b_k -= round(y_jk / y_jj) b_j plus sorting, until stable."""
    n = Y.shape[0]
    for _ in range(1000):
        changed = False
        order = np.argsort(np.diag(Y), kind="stable")
        if np.any(order != np.arange(n)):
            P = np.eye(n, dtype=np.int64)[:, order]
            Y, U = P.T @ Y @ P, U @ P
            changed = True
        for j in range(n):
            for k in range(n):
                if j == k:
                    continue
                q = round(Y[j, k] / Y[j, j])
                if q:
                    T = np.eye(n, dtype=np.int64)
                    T[j, k] = -q
                    Y, U = T.T @ Y @ T, U @ T
                    changed = True
        if not changed:
            break
    return Y, U


def minkowski_reduce(Y):
    """Minkowski-reduce a positive definite Y; returns (U^T Y U, U) with U unimodular."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if Y.ndim != 2 or Y.shape[1] != n:
        raise DimensionError("Y must be square")
    if n > MAX_MINKOWSKI_DEGREE:
        raise DimensionError(f"Minkowski reduction is supported for n <= {MAX_MINKOWSKI_DEGREE}")
    try:
        np.linalg.cholesky(Y)
    except np.linalg.LinAlgError as exc:
        raise DomainError("Y is not positive definite") from exc
    Y = (Y + Y.T) / 2
    U = np.eye(n, dtype=np.int64)
    Y, U = _size_reduce(Y, U)
    for _ in range(200):
        improved = False
        for k in range(n):
            V = _primitive_candidates(n, k, ENUM_RADIUS)
            q = np.einsum("ij,jk,ik->i", V, Y, V)
            best = int(np.argmin(q))
            if q[best] < Y[k, k] * (1 - 1e-12):
                v = V[best]
                T = np.eye(n, dtype=np.int64)
                T[:, k] = v
                T[k:, k:] = _complete_column(v[k:])
                T[:k, k + 1:] = 0
                Y, U = T.T @ Y @ T, U @ T
                Y, U = _size_reduce(Y, U) if k == 0 else (Y, U)
                improved = True
                break
        if not improved:
            break
    else:
        raise ConvergenceError("Minkowski reduction did not stabilize")
    for k in range(n - 1):
        if Y[k, k + 1] < 0:
            S = np.eye(n, dtype=np.int64)
            S[k + 1, k + 1] = -1
            Y, U = S @ Y @ S, U @ S
    Y = (Y + Y.T) / 2
    return Y, U


def is_minkowski_reduced(Y, bound: int = ENUM_RADIUS, tol: float = 1e-10) -> bool:
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    d = np.diag(Y)
    scale = tol * max(1.0, float(np.max(np.abs(Y))))
    if np.any(np.diff(d) < -scale):
        return False
    for j in range(n):
        for k in range(j + 1, n):
            if abs(2 * Y[j, k]) > Y[j, j] + scale:
                return False
    for k in range(n - 1):
        if Y[k, k + 1] < -scale:
            return False
    for k in range(n):
        V = _primitive_candidates(n, k, bound)
        q = np.einsum("ij,jk,ik->i", V, Y, V)
        if np.min(q) < Y[k, k] - scale:
            return False
    return True


@lru_cache(maxsize=None)
def _inversion_candidates(n: int):
    """(subset mask, translation S) pairs; the move is Z -> inversion on the subset
    of Z + S, with |det(CZ + D)| = |det((Z + S) restricted to the subset)|."""
    out = []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            cells = [(a, b) for i, a in enumerate(subset) for b in subset[i:]]
            for vals in itertools.product((0, -1, 1), repeat=len(cells)):
                S = np.zeros((n, n), dtype=np.int64)
                for (a, b), v in zip(cells, vals):
                    S[a, b] = S[b, a] = v
                out.append((subset, S))
    return out


def _inversion_matrix(n: int, subset, S) -> np.ndarray:
    E = np.zeros((n, n), dtype=np.int64)
    E[list(subset), list(subset)] = 1
    I = np.eye(n, dtype=np.int64)
    inv = np.block([[I - E, -E], [E, I - E]])
    trans = np.block([[I, S], [np.zeros_like(I), I]])
    return inv @ trans


def siegel_reduce(Z, max_iter: int = 200) -> ReductionResult:
    Z0 = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    n = Z0.n
    if n > MAX_SIEGEL_DEGREE:
        raise DimensionError(f"Siegel reduction is supported for n <= {MAX_SIEGEL_DEGREE}")
    gamma = np.eye(2 * n, dtype=np.int64)
    Zc = Z0.Z.copy()
    steps = 0
    candidates = _inversion_candidates(n)

    def apply(g):
        nonlocal Zc, gamma
        Zc = act(SymplecticMatrix(g.astype(float)), Zc).Z
        gamma = g @ gamma

    for _ in range(max_iter):
        _, U = minkowski_reduce(Zc.imag)
        if not np.array_equal(U, np.eye(n, dtype=np.int64)):
            Uinv = np.rint(np.linalg.inv(U)).astype(np.int64)
            zero = np.zeros((n, n), dtype=np.int64)
            apply(np.block([[U.T, zero], [zero, Uinv]]))
            steps += 1
        T = np.rint(Zc.real).astype(np.int64)
        if np.any(T):
            I = np.eye(n, dtype=np.int64)
            apply(np.block([[I, -T], [np.zeros_like(I), I]]))
            steps += 1
        best, best_val = None, 1.0 - 1e-12
        for subset, S in candidates:
            idx = np.ix_(subset, subset)
            val = abs(np.linalg.det((Zc + S)[idx]))
            if val < best_val:
                best, best_val = (subset, S), val
        if best is None:
            return ReductionResult(SiegelPoint(Zc), SymplecticMatrix(gamma.astype(float)), steps)
        apply(_inversion_matrix(n, *best))
        steps += 1
    partial = ReductionResult(SiegelPoint(Zc), SymplecticMatrix(gamma.astype(float)), steps)
    raise ReductionConvergenceError(f"Siegel reduction did not terminate in {max_iter} iterations", partial)


def hermite_constant_ratio(Y) -> float:
    """prod y_jj / det Y for a reduced Y (the constant c_1(n) of the reduction theory)."""
    Y = np.asarray(Y, dtype=float)
    return float(np.prod(np.diag(Y)) / np.linalg.det(Y))


def sl2z_reduce(z: complex, max_iter: int = 1000):
    """Classical reduction of z in the upper half plane to the standard domain."""
    a, b, c, d = 1, 0, 0, 1
    for _ in range(max_iter):
        m = math.floor(z.real + 0.5)
        z -= m
        a, b = a - m * c, b - m * d
        if abs(z) < 1 - 1e-15:
            z = -1 / z
            a, b, c, d = -c, -d, a, b
        else:
            return z, np.array([[a, b], [c, d]])
    raise ConvergenceError("SL2(Z) reduction did not terminate")
