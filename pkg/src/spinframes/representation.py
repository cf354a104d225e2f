"""Clebsch-Gordan series of N spin-1/2 particles and angular-momentum coupling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .su2 import HalfInt, _twice, as_halfint

__all__ = [
    "IrrepDecomposition",
    "multiplicity",
    "clebsch_series",
    "max_useful_reps",
    "cg_coefficient",
    "orbit_dimension",
    "j_classes",
]


def _check_n(N) -> int:
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ValueError(f"number of spins must be a positive integer, got {N!r}")
    return N


def _check_class(N: int, j) -> HalfInt:
    j = as_halfint(j)
    if j.twice > N:
        raise ValueError(f"j = {j} exceeds J = N/2 for N = {N}")
    if (j.twice - N) % 2:
        raise ValueError(f"j = {j} has the wrong parity for N = {N} spins")
    return j


def j_classes(N: int) -> list[HalfInt]:
    """Total angular momenta occurring for N spins, descending from J = N/2."""
    _check_n(N)
    return [HalfInt(t) for t in range(N, -1, -2)]


def multiplicity(N: int, j) -> int:
    """Number ``n_j`` of copies of the spin-j irrep in the N-fold tensor power.

    ``n_j = (2j+1)/(J+j+1) * C(2J, J+j)``, evaluated in exact integers.
    """
    _check_n(N)
    j = _check_class(N, j)
    k = (N + j.twice) // 2  # J + j
    num = (j.twice + 1) * math.comb(N, k)
    n, rem = divmod(num, k + 1)
    assert rem == 0
    return n


def max_useful_reps(N: int, j) -> int:
    """``k_j = min(n_j, 2j+1)``: how many equivalent copies can carry iso-orthogonal components."""
    j = _check_class(_check_n(N), j)
    return min(multiplicity(N, j), j.dim)


@dataclass(frozen=True)
class IrrepDecomposition:
    n_spins: int
    entries: tuple[tuple[HalfInt, int], ...]

    def dimension(self) -> int:
        return sum(n * j.dim for j, n in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def as_dict(self) -> dict[HalfInt, int]:
        return dict(self.entries)


def clebsch_series(N: int) -> IrrepDecomposition:
    """All ``(j, n_j)`` with ``n_j > 0``, j descending from N/2."""
    entries = tuple((j, multiplicity(N, j)) for j in j_classes(N))
    return IrrepDecomposition(N, entries)


def orbit_dimension(N: int) -> int:
    """``(2J+1) + sum_{j<J} (2j+1)^2``: the largest usable orbit dimension (equals dim K)."""
    classes = j_classes(N)
    return classes[0].dim + sum(j.dim**2 for j in classes[1:])


@lru_cache(maxsize=4096)
def _log_fact(n: int) -> float:
    return math.lgamma(n + 1)


def cg_coefficient(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>`` (Condon-Shortley phases).

    Labels may be :class:`HalfInt`, ints, Fractions or floats such as ``0.5``.
    Labels that violate a selection rule give ``0.0``; labels that are not
    half-integers, or projections of the wrong parity, raise ``ValueError``.
    """
    tj1, tj2, tJ = _twice(j1), _twice(j2), _twice(J)
    tm1 = _twice(m1, allow_negative=True)
    tm2 = _twice(m2, allow_negative=True)
    tM = _twice(M, allow_negative=True)
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tJ, tM)):
        if (tj - tm) % 2:
            raise ValueError("projection m must differ from j by an integer")
    if tm1 + tm2 != tM:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2:
        return 0.0

    # Racah's single-sum formula; every argument below is an integer
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tj2 + tJ) // 2
    c = (-tj1 + tj2 + tJ) // 2
    d = (tj1 + tj2 + tJ) // 2 + 1
    log_delta = 0.5 * (_log_fact(a) + _log_fact(b) + _log_fact(c) - _log_fact(d))
    log_pref = 0.5 * (
        math.log(tJ + 1)
        + _log_fact((tj1 + tm1) // 2)
        + _log_fact((tj1 - tm1) // 2)
        + _log_fact((tj2 + tm2) // 2)
        + _log_fact((tj2 - tm2) // 2)
        + _log_fact((tJ + tM) // 2)
        + _log_fact((tJ - tM) // 2)
    )
    kmin = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    kmax = min(a, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = 0.0
    for k in range(kmin, kmax + 1):
        log_den = (
            _log_fact(k)
            + _log_fact(a - k)
            + _log_fact((tj1 - tm1) // 2 - k)
            + _log_fact((tj2 + tm2) // 2 - k)
            + _log_fact((tJ - tj2 + tm1) // 2 + k)
            + _log_fact((tJ - tj1 - tm2) // 2 + k)
        )
        total += (-1) ** k * math.exp(log_delta + log_pref - log_den)
    return total
