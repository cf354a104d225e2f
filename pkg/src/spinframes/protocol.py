"""Alice's reference state, Bob's maximum-likelihood covariant POVM and error estimates.

The state puts amplitude ``A_J`` on ``|J, J>`` and spreads ``A_j`` (j < J) uniformly
over ``2j+1`` equivalent copies of class j, one distinct ``m`` per copy.  The ML
POVM seed ``|B>`` carries weight ``sqrt(2j+1)`` on the same vectors.  Because the
copies use distinct ``m`` values, the amplitude ``<B|U_g^dag|A>`` collapses to
characters plus a single Wigner element::

    p(g|e) = | sum_{j<J} A_j chi_j(g) + sqrt(2J+1) A_J D^J_{JJ}(g) |^2
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Mapping

import numpy as np

from .representation import j_classes, orbit_dimension
from .spectral import build_M, optimal_protocol
from .su2 import (
    GroupElement,
    HalfInt,
    _quats,
    as_halfint,
    character,
    haar_integrate,
    haar_quaternions,
    quat_multiply,
    transmission_error,
)

__all__ = [
    "ReferenceState",
    "LikelihoodModel",
    "EstimationResult",
    "SamplerError",
    "QuadratureWarning",
    "default_m_assignment",
    "likelihood",
    "average_character",
    "average_error",
    "sample_estimate",
    "monte_carlo_error",
    "trial_rng",
    "sample_identity_batch",
    "MAX_PROPOSALS",
]

MAX_PROPOSALS = 10**6


class SamplerError(RuntimeError):
    """Rejection sampler exhausted its proposal budget."""

    def __init__(self, proposals: int, accepted: int, bound: float):
        super().__init__(
            f"rejection sampler gave up after {proposals} proposals "
            f"({accepted} accepted, envelope bound {bound:g})"
        )
        self.proposals = proposals
        self.accepted = accepted
        self.bound = bound


class QuadratureWarning(UserWarning):
    """Quadrature grid too coarse to integrate the likelihood exactly."""


def default_m_assignment(j) -> tuple[Fraction, ...]:
    """``m(alpha) = alpha - j - 1`` for alpha = 1..2j+1, i.e. m = -j, ..., j."""
    j = as_halfint(j)
    return tuple(Fraction(t, 2) for t in range(-j.twice, j.twice + 1, 2))


def _normalize_assignment(N: int, m_assignment) -> dict[HalfInt, tuple[Fraction, ...]]:
    classes = j_classes(N)[1:]
    out = {}
    given = {} if m_assignment is None else {as_halfint(k): v for k, v in m_assignment.items()}
    for j in classes:
        ms = given.pop(j, None)
        if ms is None:
            out[j] = default_m_assignment(j)
            continue
        ms = tuple(Fraction(int(round(2 * float(m))), 2) for m in ms)
        if len(ms) != j.dim:
            raise ValueError(f"class j={j} needs {j.dim} m values, got {len(ms)}")
        if any(abs(m) > j.fraction or (2 * m - j.twice) % 2 for m in ms):
            raise ValueError(f"invalid m value for j={j}: {ms}")
        if len(set(ms)) != len(ms):
            raise ValueError(f"m assignment for j={j} is not injective: {ms}")
        out[j] = ms
    if given:
        raise ValueError(f"m assignment given for classes outside j < J: {sorted(given)}")
    return out


@dataclass(frozen=True)
class ReferenceState:
    """Alice's state: class amplitudes ``A_j`` (ordered J, J-1, ...) and the injection ``m(alpha)``."""

    n_spins: int
    coefficients: np.ndarray
    m_assignment: Mapping[HalfInt, tuple[Fraction, ...]] = field(default=None)

    def __post_init__(self):
        N = self.n_spins
        if isinstance(N, bool) or not isinstance(N, int) or N < 2:
            raise ValueError(f"N must be >= 2, got {N!r}")
        A = np.array(self.coefficients, dtype=float)
        if A.shape != (len(j_classes(N)),):
            raise ValueError(f"need {len(j_classes(N))} coefficients for N={N}, got shape {A.shape}")
        if np.any(A < 0):
            raise ValueError("coefficients must be non-negative")
        if abs(float(A @ A) - 1) > 1e-12:
            raise ValueError(f"coefficients must have unit norm, got {math.sqrt(A @ A):.15f}")
        A.setflags(write=False)
        object.__setattr__(self, "coefficients", A)
        object.__setattr__(self, "m_assignment", _normalize_assignment(N, self.m_assignment))

    @classmethod
    def optimal(cls, N: int, m_assignment=None) -> "ReferenceState":
        return cls(N, optimal_protocol(N).coefficients, m_assignment)

    @classmethod
    def concentrated(cls, N: int, j) -> "ReferenceState":
        """All amplitude on a single class ``j``."""
        labels = j_classes(N)
        A = np.zeros(len(labels))
        A[labels.index(as_halfint(j))] = 1.0
        return cls(N, A)

    @property
    def row_labels(self) -> list[HalfInt]:
        return j_classes(self.n_spins)

    @property
    def top(self) -> HalfInt:
        return HalfInt(self.n_spins)


@dataclass(frozen=True)
class LikelihoodModel:
    """Outcome density ``p(g|e)`` of the ML covariant POVM for a reference state."""

    reference: ReferenceState

    @property
    def n_spins(self) -> int:
        return self.reference.n_spins

    @cached_property
    def envelope(self) -> int:
        """Upper bound on ``p(g|e)``: ``|A|^2 |B|^2 = dim K``."""
        return orbit_dimension(self.n_spins)

    @cached_property
    def _chebyshev_weights(self) -> np.ndarray:
        # chi_j = U_{2j}(w) (Chebyshev, second kind); classes j < J have 2j = N-2, N-4, ...
        N = self.n_spins
        weights = np.zeros(N - 1)
        weights[N % 2 :: 2] = self.reference.coefficients[:0:-1]
        return weights

    def amplitude(self, g) -> np.ndarray | complex:
        q = _quats(g)
        N = self.n_spins
        A = self.reference.coefficients
        w = np.clip(q[..., 0], -1.0, 1.0)
        weights = self._chebyshev_weights
        amp = np.zeros(w.shape, dtype=complex)
        prev, cur = np.zeros_like(w), np.ones_like(w)
        for n in range(N - 1):
            if weights[n]:
                amp += weights[n] * cur
            prev, cur = cur, 2 * w * cur - prev
        # D^J_{JJ}(g) = cos(beta/2)^{2J} e^{-iJ(alpha+gamma)} = (w - i z)^{2J}
        amp += math.sqrt(N + 1) * A[0] * (q[..., 0] - 1j * q[..., 3]) ** N
        return complex(amp) if np.ndim(amp) == 0 else amp

    def __call__(self, g) -> np.ndarray | float:
        amp = self.amplitude(g)
        p = np.abs(amp) ** 2
        return float(p) if np.ndim(p) == 0 else p

    def peak(self) -> float:
        """``p(e|e) = (sum_{j<J} A_j (2j+1) + sqrt(2J+1) A_J)^2``."""
        A = self.reference.coefficients
        labels = self.reference.row_labels
        s = math.sqrt(labels[0].dim) * A[0] + sum(a * j.dim for a, j in zip(A[1:], labels[1:]))
        return float(s * s)


def likelihood(model: LikelihoodModel, g) -> np.ndarray | float:
    return model(g)


def _as_model(obj) -> LikelihoodModel:
    if isinstance(obj, LikelihoodModel):
        return obj
    if isinstance(obj, ReferenceState):
        return LikelihoodModel(obj)
    raise TypeError(f"expected LikelihoodModel or ReferenceState, got {type(obj).__name__}")


def exact_grid(N: int) -> int:
    """Smallest cubic grid on which ``chi_1 * p(g|e)`` is integrated exactly."""
    # gamma carries frequencies up to N+1 in units of 1/2 over its 4pi period
    return 2 * N + 3


def average_character(state: ReferenceState, method: str = "analytic", grid=48) -> float:
    """``<chi> = int chi_1(g) p(g|e) dg``, either as ``A^T M A`` or by quadrature."""
    if method == "analytic":
        A = state.coefficients
        return float(A @ build_M(state.n_spins).to_dense() @ A)
    if method == "quadrature":
        sizes = (grid,) * 3 if isinstance(grid, int) else tuple(grid)
        need = exact_grid(state.n_spins)
        if min(sizes) < need:
            warnings.warn(
                f"grid {sizes} is below {need}^3; quadrature of <chi> for N={state.n_spins} "
                "is not exact",
                QuadratureWarning,
                stacklevel=2,
            )
        model = LikelihoodModel(state)
        val = haar_integrate(lambda q: character(1, q) * model(q), grid)
        return float(val.real)
    raise ValueError(f"unknown method {method!r}; use 'analytic' or 'quadrature'")


def average_error(state: ReferenceState) -> float:
    """Mean transmission error ``6 - 2 <chi>``."""
    return 6 - 2 * average_character(state, "analytic")


def _draw_from_identity(
    model: LikelihoodModel, rng: np.random.Generator, max_proposals: int = MAX_PROPOSALS
) -> tuple[np.ndarray, int]:
    """One draw from ``p(.|e)`` by rejection against the Haar measure."""
    bound = model.envelope
    batch = int(min(max(16, 2 * bound), 4096))
    proposals = 0
    while proposals < max_proposals:
        n = min(batch, max_proposals - proposals)
        q = haar_quaternions(rng, n)
        u = rng.random(n)
        ok = np.flatnonzero(u * bound <= model(q))
        if ok.size:
            first = ok[0]
            return q[first], proposals + first + 1
        proposals += n
    raise SamplerError(proposals, 0, bound)


def sample_estimate(model, g_star: GroupElement, rng: np.random.Generator) -> GroupElement:
    """Draw an estimate with density ``p(g | g_star) = p(g_star^-1 g | e)``."""
    model = _as_model(model)
    q0, _ = _draw_from_identity(model, rng)
    return GroupElement.from_array(quat_multiply(g_star, q0))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one Monte Carlo trial, keyed by ``(seed, trial)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


@dataclass(frozen=True)
class EstimationResult:
    n_spins: int
    trials: int
    seed: int
    mean_error: float
    std_error: float
    analytic_error: float
    acceptance_rate: float

    @property
    def z_score(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean_error == self.analytic_error else math.inf
        return abs(self.mean_error - self.analytic_error) / self.std_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["z_score"] = self.z_score
        return d


def _run_trials(model: LikelihoodModel, seed: int, start: int, stop: int):
    truths = np.empty((stop - start, 4))
    offsets = np.empty((stop - start, 4))
    proposals = 0
    for i in range(start, stop):
        rng = trial_rng(seed, i)
        truths[i - start] = haar_quaternions(rng, 1)[0]
        offsets[i - start], used = _draw_from_identity(model, rng)
        proposals += used
    estimates = quat_multiply(truths, offsets)
    return transmission_error(estimates, truths), proposals


def monte_carlo_error(
    model, trials: int, seed: int, workers: int | None = None, chunk: int = 5000
) -> EstimationResult:
    """Estimate the average transmission error with Haar-random true rotations.

    Trial ``i`` uses its own stream :func:`trial_rng(seed, i)`, so results do not
    depend on ``workers`` or on scheduling.
    """
    model = _as_model(model)
    if trials < 100:
        raise ValueError("need at least 100 trials")
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    if workers and workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _run_trials,
                    [model] * len(bounds),
                    [seed] * len(bounds),
                    [b[0] for b in bounds],
                    [b[1] for b in bounds],
                )
            )
    else:
        parts = [_run_trials(model, seed, a, b) for a, b in bounds]
    errors = np.concatenate([p[0] for p in parts])
    proposals = sum(p[1] for p in parts)
    # np.sum is pairwise, so the mean is reproducible for a fixed trial count
    mean = float(np.sum(errors) / trials)
    std = float(np.std(errors, ddof=1) / math.sqrt(trials))
    return EstimationResult(
        n_spins=model.n_spins,
        trials=trials,
        seed=int(seed),
        mean_error=mean,
        std_error=std,
        analytic_error=average_error(model.reference),
        acceptance_rate=float(trials / proposals),
    )


def sample_identity_batch(
    model, rng: np.random.Generator, size: int, max_proposals: int = MAX_PROPOSALS
) -> np.ndarray:
    """``size`` independent draws from ``p(.|e)`` as an ``(size, 4)`` quaternion array.

    Accepted proposals of a rejection sampler are i.i.d., so whole batches are
    screened at once. ``max_proposals`` caps the budget per requested draw.
    """
    model = _as_model(model)
    bound = model.envelope
    budget = max_proposals * size
    batch = int(min(max(4096, 2 * bound * size), 1 << 18))
    parts, have, proposals = [], 0, 0
    while have < size:
        if proposals >= budget:
            raise SamplerError(proposals, have, bound)
        n = min(batch, budget - proposals)
        q = haar_quaternions(rng, n)
        u = rng.random(n)
        acc = q[u * bound <= model(q)]
        parts.append(acc)
        have += len(acc)
        proposals += n
    return np.concatenate(parts)[:size]
