"""The tridiagonal average-character matrix and its leading eigenpair.

For N spins the average character of the covariant maximum-likelihood scheme
is the quadratic form ``A^T M A`` in the class amplitudes ``A = (A_J, A_{J-1}, ...)``.
``M`` is tridiagonal with corner ``J/(J+1)``, first off-diagonal ``1/sqrt(2J+1)``,
ones elsewhere and a last diagonal entry of 0 (N even) or 1 (N odd).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .representation import j_classes
from .su2 import HalfInt

__all__ = [
    "TridiagonalSymmetric",
    "OptimalProtocol",
    "ConvergenceError",
    "build_M",
    "build_T",
    "sigma_closed_form",
    "sturm_count",
    "leading_eigenpair",
    "optimal_protocol",
    "asymptotic_error",
    "baseline_error",
]


class ConvergenceError(RuntimeError):
    """Eigen-iteration failed to reach tolerance within its iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class TridiagonalSymmetric:
    diag: np.ndarray
    offdiag: np.ndarray
    row_labels: tuple[HalfInt, ...] = field(default=())

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or e.size != max(d.size - 1, 0):
            raise ValueError("need len(offdiag) == len(diag) - 1")
        if d.size == 0:
            raise ValueError("empty matrix")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("entries must be finite")
        if self.row_labels and len(self.row_labels) != d.size:
            raise ValueError("one row label per row")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def drop_first(self) -> "TridiagonalSymmetric":
        if self.size < 2:
            raise ValueError("deleting the first row leaves an empty matrix")
        return TridiagonalSymmetric(self.diag[1:], self.offdiag[1:], self.row_labels[1:])


def _check_n(N, minimum: int) -> int:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < minimum:
        raise ValueError(f"N must be >= {minimum}, got {N!r}")
    return int(N)


def build_M(N: int) -> TridiagonalSymmetric:
    N = _check_n(N, 2)
    labels = j_classes(N)
    J = N / 2
    size = len(labels)
    diag = np.ones(size)
    diag[-1] = float(N % 2)
    diag[0] = J / (J + 1)
    off = np.ones(size - 1)
    off[0] = 1 / math.sqrt(2 * J + 1)
    return TridiagonalSymmetric(diag, off, tuple(labels))


def build_T(N: int) -> TridiagonalSymmetric:
    """``M^(N)`` with the j = J row and column removed."""
    return build_M(N).drop_first()


def sigma_closed_form(N) -> float:
    """Largest eigenvalue of ``T^(N)``: ``1 + 2 cos(2 pi / (N+1))``."""
    return 1 + 2 * math.cos(2 * math.pi / (N + 1))


def asymptotic_error(N) -> float:
    """Leading large-N transmission error ``8 pi^2 / N^2``."""
    return 8 * math.pi**2 / N**2


def baseline_error(N) -> float:
    """The ``8/N`` large-N error of a scheme that uses one copy per irrep class."""
    return 8 / N


def sturm_count(T: TridiagonalSymmetric, x: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``x`` (LDL^T inertia)."""
    d, e = T.diag, T.offdiag
    count = 0
    q = d[0] - x
    # pivot floor as in LAPACK's dstebz: keeps e^2 / q finite
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e**2, initial=0.0)))
    for i in range(T.size):
        if i > 0:
            q = d[i] - x - e[i - 1] ** 2 / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def _gershgorin(T: TridiagonalSymmetric) -> tuple[float, float]:
    r = np.zeros(T.size)
    r[:-1] += np.abs(T.offdiag)
    r[1:] += np.abs(T.offdiag)
    return float(np.min(T.diag - r)), float(np.max(T.diag + r))


def _solve_shifted(T: TridiagonalSymmetric, shift: float, b: np.ndarray) -> np.ndarray:
    """Solve ``(shift*I - T) x = b``; positive definite when ``shift`` exceeds the spectrum."""
    n = T.size
    a = shift - T.diag
    off = -T.offdiag
    cp = np.zeros(n)
    dp = np.zeros(n)
    denom = a[0]
    dp[0] = b[0] / denom
    for i in range(1, n):
        cp[i - 1] = off[i - 1] / denom
        denom = a[i] - off[i - 1] * cp[i - 1]
        dp[i] = (b[i] - off[i - 1] * dp[i - 1]) / denom
    x = dp
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def leading_eigenpair(
    T: TridiagonalSymmetric, tol: float = 1e-12, max_iter: int = 200
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue by Sturm bisection, eigenvector by shifted inverse iteration.

    The returned vector has unit norm and is sign-fixed to a non-negative sum.
    Raises :class:`ConvergenceError` if the residual ``|Tv - lv|_inf`` does not
    drop below ``tol * (1 + |l|)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = T.size
    if n == 1:
        return float(T.diag[0]), np.ones(1)

    lo, hi = _gershgorin(T)
    scale = max(abs(lo), abs(hi), 1.0)
    lo -= 1e-3 * scale
    hi += 1e-3 * scale
    # invariant: sturm_count(lo) <= n-1, sturm_count(hi) == n
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(T, mid) == n:
            hi = mid
        else:
            lo = mid
    lam = hi

    # hi lies just above the top eigenvalue, so (hi + delta) I - T is positive definite
    shift = lam + max(1e-14 * scale, 4 * np.finfo(float).eps * scale)
    v = np.full(n, 1 / math.sqrt(n))
    residual = math.inf
    for _ in range(max_iter):
        v = _solve_shifted(T, shift, v)
        v /= np.linalg.norm(v)
        Tv = T.matvec(v)
        rq = float(v @ Tv)
        residual = float(np.max(np.abs(Tv - rq * v)))
        if residual <= tol * (1 + abs(rq)):
            lam = rq
            break
    else:
        raise ConvergenceError("inverse iteration did not converge", residual)

    if v.sum() < 0:
        v = -v
    return lam, v


@dataclass(frozen=True)
class OptimalProtocol:
    """Best class amplitudes ``A_j`` (ordered like ``row_labels``) and the resulting ``<chi>``."""

    n_spins: int
    eigenvalue: float
    coefficients: np.ndarray
    row_labels: tuple[HalfInt, ...]

    @property
    def average_error(self) -> float:
        return 6 - 2 * self.eigenvalue

    def coefficient(self, j) -> float:
        from .su2 import as_halfint

        return float(self.coefficients[self.row_labels.index(as_halfint(j))])


@lru_cache(maxsize=512)
def optimal_protocol(N: int) -> OptimalProtocol:
    M = build_M(N)
    lam, v = leading_eigenpair(M)
    # Perron vector: strictly positive up to rounding
    v = np.where(np.abs(v) < 1e-15, 0.0, v)
    if np.any(v < 0):
        raise ConvergenceError("leading eigenvector is not non-negative", float(-v.min()))
    v = v / np.linalg.norm(v)
    v.setflags(write=False)
    return OptimalProtocol(N, lam, v, M.row_labels)
