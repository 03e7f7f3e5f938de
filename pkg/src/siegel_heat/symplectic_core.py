"""Siegel upper half space H_n, the action of Sp(n, R) and invariant coordinates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, StepSizeError

SYMMETRY_TOL = 1e-10


def _as_complex_matrix(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {Z.shape}")
    return Z


def _is_positive_definite(Y: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(Y)
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class SiegelPoint:
    """Complex symmetric n x n matrix Z = X + iY with Y positive definite."""

    Z: np.ndarray

    def __post_init__(self):
        Z = _as_complex_matrix(self.Z)
        scale = max(1.0, float(np.max(np.abs(Z))))
        if np.max(np.abs(Z - Z.T)) > SYMMETRY_TOL * scale:
            raise DomainError("Z is not symmetric")
        Z = (Z + Z.T) / 2
        if not _is_positive_definite(Z.imag):
            raise DomainError("Im Z is not positive definite")
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)

    @classmethod
    def from_xy(cls, X, Y) -> "SiegelPoint":
        return cls(np.asarray(X, dtype=float) + 1j * np.asarray(Y, dtype=float))

    @classmethod
    def identity(cls, n: int) -> "SiegelPoint":
        return cls(1j * np.eye(n))

    @classmethod
    def radial(cls, r) -> "SiegelPoint":
        """The point i * diag(exp(2 r)), at radial coordinates r from i * 1_n."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return cls(1j * np.diag(np.exp(2 * r)))

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def X(self) -> np.ndarray:
        return self.Z.real

    @property
    def Y(self) -> np.ndarray:
        return self.Z.imag


@dataclass(frozen=True)
class SymplecticMatrix:
    """Real 2n x 2n matrix g with g^T J g = J, stored with blocks A, B, C, D."""

    M: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise DimensionError(f"expected a 2n x 2n matrix, got shape {M.shape}")
        n = M.shape[0] // 2
        J = standard_J(n)
        err = np.max(np.abs(M.T @ J @ M - J))
        if err > self.tol * max(1.0, float(np.max(np.abs(M))) ** 2):
            raise DomainError(f"matrix is not symplectic (defect {err:.3g})")
        M = M.copy()
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @classmethod
    def from_blocks(cls, A, B, C, D) -> "SymplecticMatrix":
        return cls(np.block([[np.atleast_2d(A), np.atleast_2d(B)], [np.atleast_2d(C), np.atleast_2d(D)]]))

    @classmethod
    def translation(cls, S) -> "SymplecticMatrix":
        S = np.atleast_2d(np.asarray(S, dtype=float))
        I = np.eye(S.shape[0])
        return cls.from_blocks(I, S, 0 * I, I)

    @classmethod
    def rotation(cls, U) -> "SymplecticMatrix":
        """Image of a unitary U = A + iB in Sp(n, R) as [[A, B], [-B, A]]."""
        U = np.atleast_2d(np.asarray(U, dtype=complex))
        return cls.from_blocks(U.real, U.imag, -U.imag, U.real)

    @classmethod
    def unimodular(cls, U) -> "SymplecticMatrix":
        """[[U^T, 0], [0, U^-1]], acting as Z -> U^T Z U."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return cls.from_blocks(U.T, np.zeros_like(U), np.zeros_like(U), np.linalg.inv(U))

    @classmethod
    def radial(cls, r) -> "SymplecticMatrix":
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return cls(np.diag(np.concatenate([np.exp(r), np.exp(-r)])))

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    @property
    def blocks(self):
        n = self.n
        M = self.M
        return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.M @ other.M)

    def inverse(self) -> "SymplecticMatrix":
        n = self.n
        J = standard_J(n)
        return SymplecticMatrix(-J @ self.M.T @ J)


@dataclass(frozen=True)
class RadialVector:
    """Radial coordinates r_1 >= ... >= r_n >= 0."""

    r: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        if np.any(r < -1e-12):
            raise DomainError("radial coordinates must be nonnegative")
        r = np.sort(np.maximum(r, 0.0))[::-1].copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.r.shape[0]


@dataclass(frozen=True)
class CrossRatioSpectrum:
    """Eigenvalues of the matrix cross ratio, sorted descending, in [0, 1)."""

    eigenvalues: np.ndarray


def standard_J(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def _point(Z) -> SiegelPoint:
    return Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)


def _symp(g) -> SymplecticMatrix:
    return g if isinstance(g, SymplecticMatrix) else SymplecticMatrix(g)


def mobius(A, B, C, D, Z):
    """(AZ + B)(CZ + D)^-1 for stacked blocks; works on batches via broadcasting."""
    num = A @ Z + B
    den = C @ Z + D
    W = np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2))
    W = np.swapaxes(W, -1, -2)
    return (W + np.swapaxes(W, -1, -2)) / 2


def act(g, Z) -> SiegelPoint:
    g = _symp(g)
    Z = _point(Z)
    if g.n != Z.n:
        raise DimensionError(f"g acts on H_{g.n}, point lies in H_{Z.n}")
    A, B, C, D = g.blocks
    return SiegelPoint(mobius(A, B, C, D, Z.Z))


def _base_change(Z: SiegelPoint, W: np.ndarray) -> np.ndarray:
    """Move W by the element of Sp(n, R) that sends Z to i * 1_n."""
    L = np.linalg.cholesky(Z.Y)
    Linv = np.linalg.inv(L)
    Wp = Linv @ (W - Z.X) @ Linv.T
    return (Wp + Wp.T) / 2


def _radial_from_identity(W: np.ndarray) -> np.ndarray:
    """Radial coordinates of (i 1_n, W), sorted descending.

    tanh(r) are the singular values of the Cayley image; cosh(r) are the singular
    values of (W + i) L^-T / 2 with Im W = L L^T. Small r use the first, large r
    the second, so neither loses digits.
    """
    n = W.shape[0]
    I = np.eye(n)
    zeta = np.linalg.solve((W + 1j * I).T, (W - 1j * I).T).T
    tanh = np.sort(np.clip(np.linalg.svd(zeta, compute_uv=False), 0.0, 1.0))[::-1]
    L = np.linalg.cholesky(W.imag)
    M = np.linalg.solve(L, (W + 1j * I).T).T / 2
    cosh = np.sort(np.maximum(np.linalg.svd(M, compute_uv=False), 1.0))[::-1]
    return np.where(tanh < 0.5, np.arctanh(np.minimum(tanh, 0.5)), np.arccosh(cosh))


def radial_coordinates(Z, W) -> RadialVector:
    Z = _point(Z)
    W = _point(W)
    if Z.n != W.n:
        raise DimensionError("points lie in different dimensions")
    return RadialVector(_radial_from_identity(_base_change(Z, W.Z)))


def cross_ratio_spectrum(Z, W) -> CrossRatioSpectrum:
    r = radial_coordinates(Z, W).r
    return CrossRatioSpectrum(np.tanh(r) ** 2)


def cross_ratio_matrix(Z, W) -> np.ndarray:
    """(Z - W)(Z - W*)^-1 (Z* - W*)(Z* - W)^-1, with * the complex conjugate."""
    Z = _point(Z).Z
    W = _point(W).Z
    Zc, Wc = Z.conj(), W.conj()
    return (Z - W) @ np.linalg.inv(Z - Wc) @ (Zc - Wc) @ np.linalg.inv(Zc - W)


def distance(Z, W, convention: str = "paper") -> float:
    """Invariant distance. "metric": sqrt(sum (2 r_j)^2), the Riemannian distance of
    ds^2 = tr(Y^-1 dZ Y^-1 dZ*); the default convention token "paper" is that distance
    times sqrt(2)."""
    r = radial_coordinates(Z, W).r
    d = float(np.sqrt(np.sum((2 * r) ** 2)))
    if convention == "metric":
        return d
    if convention == "paper":
        return float(np.sqrt(2.0) * d)
    raise DomainError(f"unknown distance convention {convention!r}")


def cosh_product(Z, W) -> float:
    """4^n det Y_Z det Y_W / |det(W - conj Z)|^2, equal to prod cosh^-2(r_j)."""
    Z = _point(Z)
    W = _point(W)
    n = Z.n
    _, ldz = np.linalg.slogdet(Z.Y)
    _, ldw = np.linalg.slogdet(W.Y)
    _, ldd = np.linalg.slogdet(W.Z - Z.Z.conj())
    return float(np.exp(n * np.log(4.0) + ldz + ldw - 2 * ldd))


def cayley(Z) -> np.ndarray:
    Z = _point(Z).Z
    I = np.eye(Z.shape[0])
    W = np.linalg.solve((Z + 1j * I).T, (Z - 1j * I).T).T
    return (W + W.T) / 2


def inverse_cayley(zeta) -> SiegelPoint:
    zeta = _as_complex_matrix(zeta)
    if np.linalg.norm(zeta, 2) >= 1:
        raise DomainError("operator norm of zeta must be < 1")
    I = np.eye(zeta.shape[0])
    Z = 1j * np.linalg.solve((I - zeta).T, (I + zeta).T).T
    return SiegelPoint((Z + Z.T) / 2)


def nak_diagonal(Y: np.ndarray) -> np.ndarray:
    """D in Y = P D P^T with P unit upper-triangular (batched over leading axes)."""
    Yr = Y[..., ::-1, ::-1]
    L = np.linalg.cholesky(Yr)
    d = np.diagonal(L, axis1=-2, axis2=-1) ** 2
    return d[..., ::-1]


def iwasawa_a_part(g) -> np.ndarray:
    """H(g) in g = k exp(H) n with n in the upper unipotent radical.

    Computed as -1/2 log D for Im(g^-1 . i) = P D P^T.
    """
    g = _symp(g)
    W = act(g.inverse(), SiegelPoint.identity(g.n))
    return -0.5 * np.log(nak_diagonal(W.Y))


def _coordinate_pairs(n: int):
    return [(a, b) for a in range(n) for b in range(a, n)]


def apply_maass_laplacian(f: Callable[[np.ndarray], complex], Z, kappa: float = 0.0,
                          h: float = 1e-3) -> complex:
    """Finite-difference Delta^(kappa) f at Z.

    Delta^(kappa) = tr((Y d_X)^2) + tr((Y d_Y)^2) - i kappa tr(Y d_X), with the
    symmetric derivative d_ab = (1 + delta_ab)/2 d/dz_ab. f takes a complex
    symmetric matrix. The result is the Richardson combination of steps h and h/2.
    """
    Z = _point(Z)
    n = Z.n
    reach = 2 * h * n
    if np.linalg.eigvalsh(Z.Y)[0] <= reach:
        raise StepSizeError(f"stencil of step {h} leaves the cone Y > 0 at this point")
    lo = _laplacian_stencil(f, Z.Z, kappa, h)
    hi = _laplacian_stencil(f, Z.Z, kappa, h / 2)
    return (4 * hi - lo) / 3


def _laplacian_stencil(f, Z, kappa, h):
    n = Z.shape[0]
    pairs = _coordinate_pairs(n)
    Y = Z.imag
    E = {}
    for a, b in pairs:
        e = np.zeros((n, n))
        e[a, b] = e[b, a] = 1.0
        E[(a, b)] = e

    def ev(shift):
        W = Z + shift
        return complex(f((W + W.T) / 2))

    f0 = ev(0)

    def hessian(unit):
        m = len(pairs)
        H = np.zeros((m, m), dtype=complex)
        grad = np.zeros(m, dtype=complex)
        for p, P in enumerate(pairs):
            fp = ev(unit * h * E[P])
            fm = ev(-unit * h * E[P])
            H[p, p] = (fp - 2 * f0 + fm) / h**2
            grad[p] = (fp - fm) / (2 * h)
            for q in range(p):
                Q = pairs[q]
                fpp = ev(unit * h * (E[P] + E[Q]))
                fpm = ev(unit * h * (E[P] - E[Q]))
                fmp = ev(unit * h * (-E[P] + E[Q]))
                fmm = ev(-unit * h * (E[P] + E[Q]))
                H[p, q] = H[q, p] = (fpp - fpm - fmp + fmm) / (4 * h**2)
        return H, grad

    def sym_index(a, b):
        return pairs.index((min(a, b), max(a, b)))

    def scale(a, b):
        return 1.0 if a == b else 0.5

    def trace_term(H):
        total = 0j
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for k in range(n):
                        yy = Y[a, b] * Y[c, k]
                        if yy == 0:
                            continue
                        p, q = sym_index(k, a), sym_index(c, b)
                        total += yy * scale(k, a) * scale(c, b) * H[p, q]
        return total

    Hx, gx = hessian(1.0)
    Hy, _ = hessian(1j)
    result = trace_term(Hx) + trace_term(Hy)
    if kappa:
        first = sum(Y[a, b] * scale(b, a) * gx[sym_index(b, a)] for a in range(n) for b in range(n))
        result -= 1j * kappa * first
    return result
