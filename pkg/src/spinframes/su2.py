"""SU(2) arithmetic on unit quaternions, Wigner matrices, characters and Haar measure.

Conventions
-----------
A unit quaternion ``(w, x, y, z)`` represents the SU(2) matrix
``U = w*I - i*(x*sx + y*sy + z*sz)``, i.e. a rotation by angle ``theta`` about
the unit axis ``n`` is ``(cos(theta/2), sin(theta/2)*n)``.  Hamilton products map
to matrix products.

Wigner matrices use the zyz Euler decomposition ``g = Rz(alpha) Ry(beta) Rz(gamma)``
with ``D^j_{m'm} = exp(-i m' alpha) d^j_{m'm}(beta) exp(-i m gamma)`` and
Condon-Shortley phases.  Rows and columns are ordered ``m = -j, ..., +j``.

Most functions accept either a :class:`GroupElement` or an array of quaternions
with trailing dimension 4, so that quadrature and sampling can be vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

import numpy as np

__all__ = [
    "HalfInt",
    "GroupElement",
    "EulerZYZ",
    "as_halfint",
    "compose",
    "inverse",
    "rotation_matrix",
    "rotation_angle",
    "transmission_error",
    "wigner_small_d",
    "wigner_D",
    "character",
    "haar_sample",
    "haar_quaternions",
    "haar_grid",
    "haar_integrate",
    "quat_multiply",
    "euler_to_quat",
    "quat_to_euler",
]


@dataclass(frozen=True, order=True)
class HalfInt:
    """Non-negative half-integer stored exactly as ``twice = 2j``."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise TypeError(f"twice must be an integer, got {self.twice!r}")
        if self.twice < 0:
            raise ValueError(f"angular momentum must be non-negative, got 2j={self.twice}")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def from_value(cls, value) -> "HalfInt":
        return as_halfint(value)

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def dim(self) -> int:
        return self.twice + 1

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers ``-j, ..., j`` as floats."""
        return (np.arange(self.dim) * 2 - self.twice) / 2

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def _twice(value, *, allow_negative: bool = False) -> int:
    """Return ``2*value`` as an exact integer, rejecting non half-integers."""
    if isinstance(value, HalfInt):
        return value.twice
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not angular momenta")
    if isinstance(value, (int, np.integer)):
        t = 2 * int(value)
    elif isinstance(value, Fraction):
        if (2 * value).denominator != 1:
            raise ValueError(f"{value} is not a half-integer")
        t = int(2 * value)
    else:
        v = float(value)
        t = round(2 * v)
        if not math.isfinite(v) or abs(2 * v - t) > 1e-9:
            raise ValueError(f"{value!r} is not a half-integer")
    if t < 0 and not allow_negative:
        raise ValueError(f"angular momentum must be non-negative, got {value!r}")
    return t


def as_halfint(value) -> HalfInt:
    """Coerce ``HalfInt``, int, Fraction or float (like ``0.5``) to :class:`HalfInt`."""
    if isinstance(value, HalfInt):
        return value
    return HalfInt(_twice(value))


@dataclass(frozen=True)
class GroupElement:
    """An SU(2) element as a unit quaternion; renormalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        q = np.array([self.w, self.x, self.y, self.z], dtype=float)
        norm = float(np.linalg.norm(q))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("quaternion must be finite and non-zero")
        q /= norm
        for name, val in zip("wxyz", q):
            object.__setattr__(self, name, float(val))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, q) -> "GroupElement":
        q = np.asarray(q, dtype=float)
        return cls(*q)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "GroupElement":
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        s = math.sin(angle / 2)
        return cls(math.cos(angle / 2), *(s * axis))

    @classmethod
    def rx(cls, angle: float) -> "GroupElement":
        return cls.from_axis_angle((1, 0, 0), angle)

    @classmethod
    def ry(cls, angle: float) -> "GroupElement":
        return cls.from_axis_angle((0, 1, 0), angle)

    @classmethod
    def rz(cls, angle: float) -> "GroupElement":
        return cls.from_axis_angle((0, 0, 1), angle)

    @classmethod
    def from_euler(cls, alpha: float, beta: float, gamma: float) -> "GroupElement":
        return cls.from_array(euler_to_quat(alpha, beta, gamma))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def su2_matrix(self) -> np.ndarray:
        """2x2 SU(2) matrix in the ``m = -1/2, +1/2`` ordering (same as ``wigner_D(1/2, g)``)."""
        return _su2_matrices(self.as_array())

    def euler(self) -> "EulerZYZ":
        a, b, c = quat_to_euler(self.as_array())
        return EulerZYZ(float(a), float(b), float(c))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def __neg__(self) -> "GroupElement":
        return GroupElement(-self.w, -self.x, -self.y, -self.z)


@dataclass(frozen=True)
class EulerZYZ:
    """zyz Euler angles covering SU(2): alpha in [0, 2pi), beta in [0, pi], gamma in [0, 4pi)."""

    alpha: float
    beta: float
    gamma: float

    def to_group(self) -> GroupElement:
        return GroupElement.from_euler(self.alpha, self.beta, self.gamma)


QuatLike = Union[GroupElement, np.ndarray]


def _quats(g) -> np.ndarray:
    if isinstance(g, GroupElement):
        return g.as_array()
    q = np.asarray(g, dtype=float)
    if q.shape[-1] != 4:
        raise ValueError(f"quaternion arrays need a trailing axis of length 4, got {q.shape}")
    return q


def quat_multiply(p, q) -> np.ndarray:
    """Hamilton product of quaternion arrays (broadcasting)."""
    p = _quats(p)
    q = _quats(q)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product ``g*h`` (apply ``h`` first)."""
    return GroupElement.from_array(quat_multiply(g, h))


def inverse(g: GroupElement) -> GroupElement:
    return g.inverse()


def rotation_matrix(g) -> np.ndarray:
    """SO(3) matrix of ``g``; the columns are the images of the x, y, z axes."""
    q = _quats(g)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )
    return R


def rotation_angle(g) -> np.ndarray | float:
    """SU(2) rotation angle theta in [0, 2pi], defined by ``w = cos(theta/2)``."""
    q = _quats(g)
    w = q[..., 0]
    v = np.linalg.norm(q[..., 1:], axis=-1)
    theta = 2 * np.arctan2(v, w)
    return float(theta) if np.ndim(theta) == 0 else theta


def transmission_error(g, g_star) -> np.ndarray | float:
    """Sum over the three axes of ``|R(g) n - R(g_star) n|^2``; lies in ``[0, 8]``."""
    diff = rotation_matrix(g) - rotation_matrix(g_star)
    err = np.sum(diff * diff, axis=(-2, -1))
    return float(err) if np.ndim(err) == 0 else err


def euler_to_quat(alpha, beta, gamma) -> np.ndarray:
    """Quaternion(s) of ``Rz(alpha) Ry(beta) Rz(gamma)``."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(gamma, float)
    )
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    plus = (alpha + gamma) / 2
    minus = (alpha - gamma) / 2
    return np.stack([c * np.cos(plus), -s * np.sin(minus), s * np.cos(minus), c * np.sin(plus)], axis=-1)


def quat_to_euler(q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`euler_to_quat` with alpha in [0, 2pi), gamma in [0, 4pi)."""
    q = _quats(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    beta = 2 * np.arctan2(np.hypot(x, y), np.hypot(w, z))
    plus = np.arctan2(z, w)
    minus = np.arctan2(-x, y)
    alpha = plus + minus
    gamma = plus - minus
    # shifting alpha and gamma by the same multiple of 2pi leaves the element unchanged
    two_pi = 2 * np.pi
    k = np.floor(alpha / two_pi)
    alpha = alpha - two_pi * k
    gamma = gamma - two_pi * k
    # rounding can leave alpha just outside [0, 2pi)
    low = alpha < 0
    alpha = np.where(low, alpha + two_pi, alpha)
    gamma = np.where(low, gamma + two_pi, gamma)
    high = alpha >= two_pi
    alpha = np.where(high, alpha - two_pi, alpha)
    gamma = np.where(high, gamma - two_pi, gamma)
    gamma = np.mod(gamma, 2 * two_pi)
    gamma = np.where(gamma >= 2 * two_pi, gamma - 2 * two_pi, gamma)
    return alpha, beta, gamma


def _su2_matrices(q: np.ndarray) -> np.ndarray:
    w, x, y, z = np.moveaxis(q, -1, 0)
    # ordering m = -1/2, +1/2
    return np.stack(
        [
            np.stack([w + 1j * z, y - 1j * x], axis=-1),
            np.stack([-y - 1j * x, w - 1j * z], axis=-1),
        ],
        axis=-2,
    )


@lru_cache(maxsize=None)
def _small_d_terms(twice_j: int):
    """Precomputed Wigner sum terms for ``d^j``.

    Returns a list over (row, col) of lists of (coefficient, cos power, sin power).
    """
    j2 = twice_j
    dim = j2 + 1
    # all of j+m, j-m etc. are integers; index with k = j + m
    lf = [math.lgamma(n + 1) for n in range(2 * j2 + 2)]
    terms = {}
    for a in range(dim):  # a = j + m'
        for b in range(dim):  # b = j + m
            mp_minus_m = a - b
            pref = 0.5 * (lf[a] + lf[j2 - a] + lf[b] + lf[j2 - b])
            out = []
            smin = max(0, b - a)
            smax = min(j2 - a, b)
            for s in range(smin, smax + 1):
                # d^j_{m'm} = sum_s (-1)^(m'-m+s) sqrt(...) / (...) c^(2j+m-m'-2s) s^(m'-m+2s)
                log_den = lf[b - s] + lf[s] + lf[a - b + s] + lf[j2 - a - s]
                coef = math.exp(pref - log_den) * (-1) ** (mp_minus_m + s)
                out.append((coef, j2 - mp_minus_m - 2 * s, mp_minus_m + 2 * s))
            terms[(a, b)] = out
    return terms


def wigner_small_d(j, beta) -> np.ndarray:
    """Wigner small-d matrix ``d^j(beta)`` of shape ``beta.shape + (2j+1, 2j+1)``."""
    j = as_halfint(j)
    beta = np.asarray(beta, dtype=float)
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    dim = j.dim
    out = np.zeros(beta.shape + (dim, dim))
    cpow = [np.ones_like(c)]
    spow = [np.ones_like(s)]
    for _ in range(2 * j.twice + 1):
        cpow.append(cpow[-1] * c)
        spow.append(spow[-1] * s)
    for (a, b), terms in _small_d_terms(j.twice).items():
        acc = np.zeros_like(c)
        for coef, pc, ps in terms:
            acc = acc + coef * cpow[pc] * spow[ps]
        out[..., a, b] = acc
    return out


def wigner_D(j, g) -> np.ndarray:
    """Spin-``j`` Wigner matrix of ``g`` (single element or quaternion batch)."""
    j = as_halfint(j)
    alpha, beta, gamma = quat_to_euler(_quats(g))
    m = j.m_values()
    d = wigner_small_d(j, beta)
    left = np.exp(-1j * np.asarray(alpha)[..., None] * m)
    right = np.exp(-1j * np.asarray(gamma)[..., None] * m)
    return left[..., :, None] * d * right[..., None, :]


def character(j, g) -> np.ndarray | float:
    """Character ``chi_j(g) = U_{2j}(cos(theta/2))`` via the Chebyshev recurrence.

    Equals ``sin((2j+1) theta/2) / sin(theta/2)`` but has no 0/0 at theta = 0, 2pi.
    """
    j = as_halfint(j)
    w = _quats(g)[..., 0]
    w = np.clip(w, -1.0, 1.0)
    prev = np.zeros_like(w)
    cur = np.ones_like(w)
    for _ in range(j.twice):
        prev, cur = cur, 2 * w * cur - prev
    return float(cur) if np.ndim(cur) == 0 else cur


def haar_quaternions(rng: np.random.Generator, size) -> np.ndarray:
    """Haar-uniform quaternions: normalized 4D standard normals."""
    if isinstance(size, int):
        size = (size,)
    v = rng.standard_normal(tuple(size) + (4,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def haar_sample(rng: np.random.Generator) -> GroupElement:
    return GroupElement.from_array(haar_quaternions(rng, 1)[0])


def _grid_sizes(grid) -> tuple[int, int, int]:
    if isinstance(grid, (int, np.integer)):
        sizes = (int(grid),) * 3
    else:
        sizes = tuple(int(n) for n in grid)
        if len(sizes) != 3:
            raise ValueError("grid must be an int or a triple (n_alpha, n_beta, n_gamma)")
    if min(sizes) < 4:
        raise ValueError(f"quadrature grid needs at least 4 points per Euler angle, got {sizes}")
    return sizes


def haar_grid(grid=32) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (quaternions) and weights for the normalized Haar measure.

    Trapezoidal rule in alpha over [0, 2pi) and gamma over [0, 4pi), Gauss-Legendre
    in ``cos(beta)`` (which absorbs the ``sin(beta)`` Jacobian).  Weights sum to one.
    """
    na, nb, ng = _grid_sizes(grid)
    alpha = 2 * np.pi * np.arange(na) / na
    gamma = 4 * np.pi * np.arange(ng) / ng
    x, wx = np.polynomial.legendre.leggauss(nb)
    beta = np.arccos(x)
    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    W = np.broadcast_to(wx[None, :, None] / (2.0 * na * ng), A.shape)
    nodes = euler_to_quat(A, B, G).reshape(-1, 4)
    return nodes, W.reshape(-1).copy()


def haar_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    grid=32,
    *,
    batched: bool = True,
) -> complex:
    """Integrate ``f`` against the normalized Haar measure of SU(2).

    With ``batched=True`` (default) ``f`` receives an ``(n, 4)`` array of quaternions
    and returns ``n`` values; otherwise it is called once per :class:`GroupElement`.
    """
    nodes, weights = haar_grid(grid)
    if batched:
        vals = np.asarray(f(nodes))
    else:
        vals = np.array([f(GroupElement.from_array(q)) for q in nodes])
    if vals.shape[0] != weights.shape[0]:
        raise ValueError("integrand must return one value per node")
    total = np.tensordot(weights, vals, axes=(0, 0))
    return complex(total) if np.ndim(total) == 0 else total
