"""Bounds on S_kappa(Z) = sum_j det(Y)^kappa |f_j(Z)|^2 over an orthonormal basis.

Three ingredients: the periodized weighted heat kernel, the exact Gaussian-moment
polynomial H_n(kappa, t) behind the cocompact estimate, and lattice sums over the
parabolic groups W_j (level ell) behind the cusp estimate, together with their
matrix beta integral majorants.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import AccuracyWarning, DimensionError, DomainError, NumericalError, ParameterRangeError
from .heat_kernel import heat_kernel_weighted_bound_grid
from .integration import QuadratureSpec
from .symplectic_core import SiegelPoint, SymplecticMatrix, act, radial_coordinates

C2_DEFAULT = 2 * math.pi
MAX_H_DEGREE = 4
MAX_LATTICE_POINTS = 20_000_000
TAIL_WARN = 0.01
BLOCK = 1 << 15
UNIT_CONSTANT_NOTE = "c_{n,Gamma} (counting/torsion constant) is not computable; reported as 1"


@dataclass(frozen=True)
class BoundReport:
    n: int
    kappa: float
    setting: str
    exponent: Fraction
    constant_estimate: float
    value: float
    factors: dict = field(default_factory=dict)
    evaluations: tuple = ()
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "kappa": self.kappa,
            "setting": self.setting,
            "exponent": str(self.exponent),
            "exponent_float": float(self.exponent),
            "constant_estimate": self.constant_estimate,
            "value": self.value,
            "factors": self.factors,
            "evaluations": [list(e) for e in self.evaluations],
            "provenance": self.provenance,
        }


# ---------------------------------------------------------------- beta integrals

def log_hua_beta(n: int, alpha: float) -> float:
    if n < 1:
        raise DimensionError("n must be >= 1")
    if not alpha > n / 2:
        raise ParameterRangeError(f"Hua integral diverges for alpha <= n/2 (alpha={alpha}, n={n})")
    out = n * (n + 1) / 4 * math.log(math.pi) + gammaln(alpha - n / 2) - gammaln(alpha)
    for v in range(1, n):
        out += gammaln(2 * alpha - (n + v) / 2) - gammaln(2 * alpha - v)
    return float(out)


def hua_beta(n: int, alpha: float) -> float:
    """int over real symmetric n x n T of det(1 + T^2)^-alpha, Lebesgue measure on T_jk, j <= k."""
    return math.exp(log_hua_beta(n, alpha))


def log_rectangular_beta(p: int, q: int, mu: float) -> float:
    if p < 1 or q < 0:
        raise DimensionError("need p >= 1 and q >= 0")
    if q and not mu > (p + q - 1) / 2:
        raise ParameterRangeError(f"rectangular beta integral diverges for mu <= (p+q-1)/2 (mu={mu})")
    out = p * q / 2 * math.log(math.pi)
    for l in range(1, q + 1):
        out += gammaln(mu - (l - 1) / 2 - p / 2) - gammaln(mu - (l - 1) / 2)
    return float(out)


def rectangular_beta(p: int, q: int, mu: float) -> float:
    """int over real p x q X of det(1 + X X^t)^-mu."""
    return math.exp(log_rectangular_beta(p, q, mu))


# ---------------------------------------------------------------- parabolic groups

@dataclass(frozen=True)
class CuspGroupElement:
    """gamma = [[A, A S], [0, A^-t]] with A = [[1, 0], [ell L, 1]] and
    S = ell [[0, H^t], [H, S2]]; acts by Z -> A (Z + S) A^t."""

    j: int
    L: np.ndarray
    H: np.ndarray
    S2: np.ndarray
    level: int = 1

    def __post_init__(self):
        S2 = np.atleast_2d(np.asarray(self.S2, dtype=np.int64))
        m = S2.shape[0]
        L = np.asarray(self.L, dtype=np.int64).reshape(m, self.j)
        H = np.asarray(self.H, dtype=np.int64).reshape(m, self.j)
        if S2.shape != (m, m) or not np.array_equal(S2, S2.T):
            raise DomainError("S2 must be a symmetric integer matrix")
        if m < 1 or self.j < 0:
            raise DimensionError("need 0 <= j < n")
        if self.level < 1:
            raise ParameterRangeError("level must be >= 1")
        object.__setattr__(self, "S2", S2)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "H", H)

    @property
    def n(self) -> int:
        return self.j + self.S2.shape[0]

    @property
    def A(self) -> np.ndarray:
        A = np.eye(self.n, dtype=np.int64)
        A[self.j:, :self.j] = self.level * self.L
        return A

    @property
    def S(self) -> np.ndarray:
        j, n = self.j, self.n
        S = np.zeros((n, n), dtype=np.int64)
        S[j:, :j] = self.H
        S[:j, j:] = self.H.T
        S[j:, j:] = self.S2
        return self.level * S

    def matrix(self) -> np.ndarray:
        A, S = self.A, self.S
        A_inv_t = np.eye(self.n, dtype=np.int64)
        A_inv_t[:self.j, self.j:] = -self.level * self.L.T
        zero = np.zeros_like(A)
        return np.block([[A, A @ S], [zero, A_inv_t]])

    def symplectic(self) -> SymplecticMatrix:
        return SymplecticMatrix(self.matrix().astype(float))

    def in_W_j(self) -> bool:
        g = self.matrix()
        n, j = self.n, self.j
        A = g[:n, :n]
        return (not np.any(g[n:, :n]) and np.array_equal(A[:j, :j], np.eye(j, dtype=np.int64))
                and not np.any(A[:j, j:]) and np.array_equal(A[j:, j:], np.eye(n - j, dtype=np.int64)))

    def act(self, Z) -> SiegelPoint:
        Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
        A = self.A.astype(float)
        return SiegelPoint(A @ (Z.Z + self.S) @ A.T)


def cusp_lattice_dimension(n: int, j: int) -> int:
    m = n - j
    return 2 * j * m + m * (m + 1) // 2


def _unpack(v: np.ndarray, n: int, j: int, level: int):
    """Integer coordinate vectors -> batched (A, S)."""
    m = n - j
    B = v.shape[0]
    A = np.broadcast_to(np.eye(n), (B, n, n)).copy()
    S = np.zeros((B, n, n))
    k = 0
    for a in range(m):
        for b in range(j):
            A[:, j + a, b] = level * v[:, k]
            S[:, j + a, b] = S[:, b, j + a] = level * v[:, k + 1]
            k += 2
    for a in range(m):
        for b in range(a, m):
            S[:, j + a, j + b] = S[:, j + b, j + a] = level * v[:, k]
            k += 1
    return A, S


def _log_cosh_products(Z: np.ndarray, A: np.ndarray, S: np.ndarray) -> np.ndarray:
    """log prod ch^-2(r_j(Z, gamma Z)) for gamma Z = A (Z + S) A^t, using det Im(gamma Z) = det Y."""
    n = Z.shape[0]
    W = A @ (Z[None] + S) @ np.swapaxes(A, -1, -2)
    _, ldy = np.linalg.slogdet(Z.imag)
    _, ldd = np.linalg.slogdet(W - Z.conj()[None])
    return n * math.log(4.0) + 2 * ldy - 2 * ldd


@dataclass(frozen=True)
class LatticeSum:
    value: float
    tail_estimate: float
    shell_sums: tuple
    cutoff: int

    def __float__(self):
        return self.value


def _tail_estimate(shells) -> float:
    """Tail beyond the last shell: the larger of a geometric and a power-law extrapolation
    of the last two shells."""
    c = len(shells) - 1
    if c < 2:
        return math.inf if c == 1 and shells[-1] > 0 else 0.0
    last, prev = shells[-1], shells[-2]
    if last == 0:
        return 0.0
    if prev <= last:
        return math.inf
    q = last / prev
    geometric = last * q / (1 - q)
    p = math.log(prev / last) / math.log(c / (c - 1))
    power = last * c / (p - 1) if p > 1 else math.inf
    return max(geometric, power)


def cusp_sum_direct(n: int, j: int, Z, kappa: float, cutoff: int = 20, level: int = 1) -> LatticeSum:
    """Sum of prod ch^-kappa(r(Z, gamma Z)) over gamma in the level-ell group W_j with
    integer coordinates |entry| <= cutoff, accumulated shell by shell (sup norm)."""
    Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    if Z.n != n:
        raise DimensionError("Z has the wrong degree")
    if not 0 <= j < n:
        raise DimensionError("need 0 <= j < n")
    if kappa < n + 1:
        raise ParameterRangeError(f"need kappa >= n + 1 = {n + 1}")
    if cutoff < 1 or level < 1:
        raise ParameterRangeError("cutoff and level must be >= 1")
    d = cusp_lattice_dimension(n, j)
    side = 2 * cutoff + 1
    total = side**d
    if total > MAX_LATTICE_POINTS:
        raise ParameterRangeError(f"{total} lattice points exceed the limit {MAX_LATTICE_POINTS}; lower cutoff")
    shells = np.zeros(cutoff + 1)
    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(start + BLOCK, total))
        v = np.stack(np.unravel_index(idx, (side,) * d), axis=1) - cutoff
        shell = np.max(np.abs(v), axis=1)
        A, S = _unpack(v.astype(float), n, j, level)
        terms = np.exp(kappa / 2 * _log_cosh_products(Z.Z, A, S))
        shells += np.bincount(shell, weights=terms, minlength=cutoff + 1)
    value = float(np.sum(shells))
    tail = _tail_estimate(list(shells))
    if tail > TAIL_WARN * value:
        warnings.warn(f"cusp sum tail estimate {tail:.3g} exceeds {TAIL_WARN:.0%} of the sum; "
                      f"increase cutoff (now {cutoff})", AccuracyWarning, stacklevel=2)
    return LatticeSum(value, tail, tuple(float(s) for s in shells), cutoff)


def log_cusp_sum_bound(n: int, j: int, Y, kappa: float, level: int = 1) -> float:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape != (n, n):
        raise DimensionError("Y has the wrong shape")
    if not 0 <= j < n:
        raise DimensionError("need 0 <= j < n")
    if kappa < n + 1:
        raise ParameterRangeError(f"need kappa >= n + 1 = {n + 1}")
    try:
        B = np.linalg.cholesky(Y)
    except np.linalg.LinAlgError as exc:
        raise DomainError("Y is not positive definite") from exc
    m = n - j
    dims = m * (m + 1) / 2 + 2 * j * m
    log_det_p2 = float(np.sum(np.log(np.diag(B)[j:])))
    out = dims * (math.log(2.0) - math.log(level)) + (m + 1 + 2 * j) * log_det_p2
    out += log_hua_beta(m, kappa / 2)
    if j:
        out += log_rectangular_beta(m, j, kappa - (n + 1) / 2)
        out += log_rectangular_beta(m, j, kappa - (m + 1) / 2)
    return out


def cusp_sum_bound(n: int, j: int, Y, kappa: float, level: int = 1) -> float:
    """Integral majorant of cusp_sum_direct: lattice volume ell^-dim times the beta integrals,
    with the Jacobian powers of the Cholesky block P2 of Y = B B^t."""
    return math.exp(log_cusp_sum_bound(n, j, Y, kappa, level))


def cusp_local_factor(n: int, kappa: float) -> float:
    if kappa < n + 1:
        raise ParameterRangeError(f"need kappa >= n + 1 = {n + 1}")
    out = 1.0
    for j in range(1, n + 1):
        out *= (kappa - (n - j + 1)) / 2
    for l, m in itertools.combinations(range(1, n + 1), 2):
        out *= (kappa - (n - (l + m) / 2 + 1)) * (m - l) / 2
    return out


def _asymptotic_exponent(log_f, kappa0: float = 1e6) -> Fraction:
    slope = (log_f(4 * kappa0) - log_f(kappa0)) / math.log(4.0)
    q = Fraction(round(4 * slope), 4)
    if abs(slope - float(q)) > 1e-3:
        raise NumericalError(f"exponent {slope} is not a multiple of 1/4")
    return q


def cusp_bound_exponent(n: int, j: int, c2: float = C2_DEFAULT, level: int = 1) -> Fraction:
    """Growth exponent of cusp_sum_bound at Y = kappa ell/(2 c2) 1, read off at large kappa."""
    def log_f(k):
        return log_cusp_sum_bound(n, j, k * level / (2 * c2) * np.eye(n), k, level)
    return _asymptotic_exponent(log_f)


# ---------------------------------------------------------------- H_n(kappa, t)

def _linear_factors(n: int):
    """The shifted linear forms of H_n scaled by 2, grouped by their smallest xi index.

    A term is (key, coeff) with key = (xi exponents..., kappa exponent, u exponent), u = sqrt t.
    """
    def key(xi=None, extra=(0, 0)):
        e = [0] * n
        for i, p in (xi or {}).items():
            e[i] += p
        return tuple(e) + extra

    groups = [[] for _ in range(n)]
    for j in range(1, n + 1):
        groups[j - 1].append([(key({j - 1: 1}), 2), (key(extra=(1, 1)), 1),
                              (key(extra=(0, 1)), -(n - j + 1))])
    for l, m in itertools.combinations(range(1, n + 1), 2):
        groups[l - 1].append([(key({l - 1: 1}), 2), (key({m - 1: 1}), -2), (key(extra=(0, 1)), l - m)])
        groups[l - 1].append([(key({l - 1: 1}), 2), (key({m - 1: 1}), 2), (key(extra=(1, 1)), 2),
                              (key(extra=(0, 1)), l + m - 2 * n - 2)])
    return groups


def _multiply(poly: dict, factor) -> dict:
    out: dict = {}
    for k, c in poly.items():
        for dk, dc in factor:
            nk = tuple(a + b for a, b in zip(k, dk))
            out[nk] = out.get(nk, 0) + c * dc
    return {k: c for k, c in out.items() if c}


def _double_factorial(m: int) -> int:
    return math.prod(range(m, 0, -2)) if m > 0 else 1


@lru_cache(maxsize=None)
def _h_coefficients(n: int):
    """Exact coefficients: H_n = pi^{n/2} sum_{a,b} coeff[a, b] kappa^a u^b."""
    groups = _linear_factors(n)
    poly = {tuple([0] * (n + 2)): 1}
    denominator = 1
    for i in range(n):
        for f in groups[i]:
            poly = _multiply(_multiply(poly, f), f)
            denominator *= 4
        # xi_i no longer occurs: integrate it against exp(-xi^2) / sqrt(pi)
        top = max((k[i] for k in poly), default=0)
        top += top % 2
        integrated: dict = {}
        for k, c in poly.items():
            e = k[i]
            if e % 2:
                continue
            nk = k[:i] + (0,) + k[i + 1:]
            w = _double_factorial(e - 1) * 2 ** ((top - e) // 2)
            integrated[nk] = integrated.get(nk, 0) + c * w
        poly = {k: c for k, c in integrated.items() if c}
        denominator *= 2 ** (top // 2)
    return {(k[n], k[n + 1]): Fraction(c, denominator) for k, c in poly.items()}


@dataclass(frozen=True)
class HPolynomial:
    n: int
    coefficients: dict  # (kappa power, sqrt(t) power) -> Fraction, times pi^{n/2}

    def __call__(self, kappa: float, t: float) -> float:
        u = math.sqrt(t)
        s = sum(float(c) * kappa**a * u**b for (a, b), c in self.coefficients.items())
        return math.pi ** (self.n / 2) * s

    @property
    def kappa_degree(self) -> int:
        return max(a for a, _ in self.coefficients)


def h_polynomial(n: int) -> HPolynomial:
    if n < 1:
        raise DimensionError("n must be >= 1")
    if n > MAX_H_DEGREE:
        raise DimensionError(f"H_n expansion is combinatorially too large for n > {MAX_H_DEGREE}")
    return HPolynomial(n, dict(_h_coefficients(n)))


def compact_H_polynomial(n: int, kappa: float, t: float):
    """(H_n(kappa, t), coefficient table in (kappa, sqrt t)); the table omits the factor pi^{n/2}."""
    H = h_polynomial(n)
    return H(kappa, t), H.coefficients


@lru_cache(maxsize=None)
def laplace_coefficients(n: int) -> dict:
    """kappa int_0^inf exp(-kappa t) H_n(kappa, t) dt = pi^{n/2} sum_e P[e] kappa^e.

    Term by term, kappa^a t^{b/2} -> Gamma(b/2 + 1) kappa^{a - b/2}; b is always even.
    """
    out: dict = {}
    for (a, b), c in h_polynomial(n).coefficients.items():
        if b % 2:
            raise NumericalError("odd power of sqrt(t) in H_n")
        e = a - b // 2
        out[e] = out.get(e, 0) + c * math.factorial(b // 2)
    return {e: c for e, c in out.items() if c}


def _cocompact_value(n: int, kappa: float) -> float:
    return math.pi ** (n / 2) * sum(float(c) * kappa**e for e, c in laplace_coefficients(n).items())


def cocompact_bound(n: int, kappa: float) -> BoundReport:
    if kappa < n + 1:
        raise ParameterRangeError(f"need kappa >= n + 1 = {n + 1}")
    coeffs = laplace_coefficients(n)
    exponent = Fraction(max(coeffs))
    value = _cocompact_value(n, kappa)
    return BoundReport(
        n=n, kappa=float(kappa), setting="cocompact", exponent=exponent,
        constant_estimate=value / kappa ** float(exponent), value=value,
        factors={"laplace_transform": value, "c_n_Gamma": 1.0,
                 "leading_coefficient": math.pi ** (n / 2) * float(coeffs[max(coeffs)])},
        provenance={"method": "exact Laplace transform of the H_n polynomial", "note": UNIT_CONSTANT_NOTE},
    )


def cofinite_bound(n: int, kappa: float, level: int = 1, c2: float = C2_DEFAULT) -> BoundReport:
    """Cocompact part plus cusp local factor times the W_j lattice-sum majorants at the
    worst admissible point Y = kappa ell/(2 c2) 1 of the cusp neighbourhood."""
    if kappa < n + 1:
        raise ParameterRangeError(f"need kappa >= n + 1 = {n + 1}")
    if level < 1:
        raise ParameterRangeError("level must be >= 1")
    if not c2 > 0:
        raise ParameterRangeError("c2 must be positive")
    compact = cocompact_bound(n, kappa)
    local = cusp_local_factor(n, kappa)
    Y = kappa * level / (2 * c2) * np.eye(n)
    sums = [cusp_sum_bound(n, j, Y, kappa, level) for j in range(n)]
    cusp = local * sum(sums)
    local_exp = Fraction(n * (n + 1), 2)
    cusp_exp = local_exp + max(cusp_bound_exponent(n, j, c2, level) for j in range(n))
    exponent = max(compact.exponent, cusp_exp)
    value = compact.value + cusp
    setting = "cofinite" if level == 1 else f"cover({level})"
    return BoundReport(
        n=n, kappa=float(kappa), setting=setting, exponent=exponent,
        constant_estimate=value / kappa ** float(exponent), value=value,
        factors={"cocompact": compact.value, "cusp_local_factor": local,
                 "cusp_sums": sums, "cusp_term": cusp, "c_n_Gamma": 1.0, "c2": c2, "level": level},
        provenance={"method": "cocompact Laplace transform + local factor x beta-integral majorants",
                    "note": UNIT_CONSTANT_NOTE},
    )


# ---------------------------------------------------------------- periodized heat kernel

def sl2z_elements(bound: int):
    """PSL2(Z) representatives with |entries| <= bound, as 2x2 integer matrices."""
    out = []
    rng = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(rng, repeat=4):
        if a * d - b * c != 1:
            continue
        first = next(x for x in (a, b, c, d) if x)
        if first > 0:
            out.append(np.array([[a, b], [c, d]]))
    return out


def periodized_heat_bound(n: int, Z, kappa: float, t: float, group_elements,
                          spec: QuadratureSpec | None = None):
    """exp(-(n kappa/4)(kappa - n - 1) t) * sum over the listed gamma of the weighted heat
    kernel majorant at r(Z, gamma Z). Returns (value, std_error)."""
    Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    if Z.n != n:
        raise DimensionError("Z has the wrong degree")
    elements = list(group_elements)
    if not elements:
        return 0.0, 0.0
    spec = spec or QuadratureSpec(method="gauss_legendre", points=256)
    rs_grid = np.array([radial_coordinates(Z, act(g, Z)).r for g in elements])
    log_scale = -(n * kappa / 4) * (kappa - n - 1) * t
    values, errors = heat_kernel_weighted_bound_grid(n, t, rs_grid, kappa, spec, log_scale=log_scale)
    return float(np.sum(values)), float(math.sqrt(np.sum(np.asarray(errors) ** 2)))


def optimize_periodized_bound(n: int, Z, kappa: float, group_elements, ts,
                              spec: QuadratureSpec | None = None):
    """Smallest periodized bound over a grid of t; returns (t, value, std_error)."""
    elements = list(group_elements)
    best = None
    for t in ts:
        v, e = periodized_heat_bound(n, Z, kappa, float(t), elements, spec)
        if best is None or v < best[1]:
            best = (float(t), v, e)
    return best
