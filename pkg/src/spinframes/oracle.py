"""Brute-force checks in the explicit 2^N-dimensional space of N spins (N <= 6).

The Schur basis ``|j alpha, m>`` is built by coupling spins one at a time from the
left with Clebsch-Gordan coefficients; ``alpha`` ranks the sequence of
intermediate total spins lexicographically.  Computational basis index 0 of a
single spin is ``m = -1/2`` so that ``U_g^{(x)N}`` is the Kronecker power of
``wigner_D(1/2, g)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .protocol import LikelihoodModel, ReferenceState, default_m_assignment
from .representation import cg_coefficient, j_classes, multiplicity, orbit_dimension
from .spectral import build_M
from .su2 import HalfInt, _quats, as_halfint, character, haar_grid, wigner_D

__all__ = [
    "MAX_ORACLE_SPINS",
    "MAX_QUADRATURE_SPINS",
    "SchurBasis",
    "IsoTransferOperator",
    "OracleCheck",
    "schur_basis",
    "tensor_rotation",
    "apply_tensor_rotation",
    "iso_transfer",
    "total_spin_squared",
    "embed_reference",
    "ml_vector",
    "subspace_K_projector",
    "full_amplitude",
    "full_likelihood",
    "verify_block_action",
    "verify_casimir",
    "verify_likelihood",
    "verify_completeness",
    "verify_M_entries",
    "verify_iso_orthogonality",
    "verify_entanglement_structure",
    "run_all",
]

MAX_ORACLE_SPINS = 6
MAX_QUADRATURE_SPINS = 4


def _check_n(N: int, limit: int = MAX_ORACLE_SPINS) -> int:
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if N > limit:
        raise ValueError(f"oracle limited to N <= {limit}, got N = {N}")
    return N


@dataclass(frozen=True)
class SchurBasis:
    """Orthonormal basis ``|j alpha, m>``; columns of ``matrix`` follow ``labels``."""

    n_spins: int
    labels: tuple[tuple[HalfInt, int, Fraction], ...]
    matrix: np.ndarray
    alpha_paths: dict = field(repr=False)

    @property
    def vectors(self) -> dict[tuple[HalfInt, int, Fraction], np.ndarray]:
        return {lab: self.matrix[:, i] for i, lab in enumerate(self.labels)}

    def index(self, j, alpha: int, m) -> int:
        return self._index[(as_halfint(j), alpha, Fraction(m))]

    @cached_property
    def _index(self):
        return {lab: i for i, lab in enumerate(self.labels)}

    def vector(self, j, alpha: int, m) -> np.ndarray:
        return self.matrix[:, self.index(j, alpha, m)]

    def block(self, j, alpha: int) -> np.ndarray:
        """``(2^N, 2j+1)`` isometry onto copy ``alpha`` of class ``j``, columns m = -j..j."""
        j = as_halfint(j)
        cols = [self.index(j, alpha, Fraction(t, 2)) for t in range(-j.twice, j.twice + 1, 2)]
        return self.matrix[:, cols]

    def n_copies(self, j) -> int:
        j = as_halfint(j)
        return sum(1 for (jj, _a) in self.alpha_paths if jj == j)


@lru_cache(maxsize=None)
def schur_basis(N: int) -> SchurBasis:
    _check_n(N)
    # states: path (tuple of 2j values) -> {2m: vector}
    states = {(1,): {-1: np.array([1.0, 0.0]), 1: np.array([0.0, 1.0])}}
    for _ in range(N - 1):
        new = {}
        for path, vecs in states.items():
            tjp = path[-1]
            for tj in (tjp + 1, tjp - 1):
                if tj < 0:
                    continue
                out = {}
                for tm in range(-tj, tj + 1, 2):
                    v = 0
                    for ts in (-1, 1):
                        tmp = tm - ts
                        if abs(tmp) > tjp:
                            continue
                        c = cg_coefficient(
                            Fraction(tjp, 2), Fraction(tmp, 2), Fraction(1, 2), Fraction(ts, 2),
                            Fraction(tj, 2), Fraction(tm, 2),
                        )
                        if c:
                            e = np.array([1.0, 0.0]) if ts == -1 else np.array([0.0, 1.0])
                            v = v + c * np.kron(vecs[tmp], e)
                    out[tm] = v
                new[path + (tj,)] = out
        states = new

    labels, cols, alpha_paths = [], [], {}
    for tj in range(N, -1, -2):
        paths = sorted(p for p in states if p[-1] == tj)
        for alpha, path in enumerate(paths, start=1):
            j = HalfInt(tj)
            alpha_paths[(j, alpha)] = tuple(HalfInt(t) for t in path)
            for tm in range(-tj, tj + 1, 2):
                labels.append((j, alpha, Fraction(tm, 2)))
                cols.append(states[path][tm])
    V = np.array(cols).T.astype(complex)
    V.setflags(write=False)
    return SchurBasis(N, tuple(labels), V, alpha_paths)


def tensor_rotation(N: int, g) -> np.ndarray:
    """``U_g^{(x)N}`` as a dense ``2^N x 2^N`` matrix (or a batch of them)."""
    _check_n(N)
    d = wigner_D(HalfInt(1), g)
    U = d
    for _ in range(N - 1):
        U = np.einsum("...ab,...cd->...acbd", U, d)
        U = U.reshape(U.shape[:-4] + (U.shape[-4] * U.shape[-3], U.shape[-2] * U.shape[-1]))
    return U


def apply_tensor_rotation(N: int, q, vec: np.ndarray) -> np.ndarray:
    """``U_g^{(x)N} vec`` for each quaternion in ``q`` without forming the matrix."""
    q = np.atleast_2d(_quats(q))
    d = wigner_D(HalfInt(1), q)  # (n, 2, 2)
    t = np.broadcast_to(np.asarray(vec, dtype=complex).reshape((2,) * N), (len(q),) + (2,) * N)
    letters = "abcdefgh"[:N]
    for k in range(N):
        src = "z" + letters
        dst = "z" + letters[:k] + "y" + letters[k + 1 :]
        t = np.einsum(f"zy{letters[k]},{src}->{dst}", d, t)
    return t.reshape(len(q), 2**N)


@dataclass(frozen=True)
class IsoTransferOperator:
    """``T^(j)_{alpha beta} = sum_m |j alpha, m><j beta, m|``."""

    j: HalfInt
    alpha: int
    beta: int
    matrix: np.ndarray


def iso_transfer(basis: SchurBasis, j, alpha: int, beta: int) -> IsoTransferOperator:
    j = as_halfint(j)
    T = basis.block(j, alpha) @ basis.block(j, beta).conj().T
    return IsoTransferOperator(j, alpha, beta, T)


def total_spin_squared(N: int) -> np.ndarray:
    paulis = [
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, 1j], [-1j, 0]]),  # sigma_y in the (m=-1/2, m=+1/2) ordering
        np.array([[-1, 0], [0, 1]], dtype=complex),
    ]
    total = np.zeros((2**N, 2**N), dtype=complex)
    for s in paulis:
        S = np.zeros_like(total)
        for i in range(N):
            ops = [np.eye(2)] * N
            ops[i] = s / 2
            term = ops[0]
            for op in ops[1:]:
                term = np.kron(term, op)
            S += term
        total += S @ S
    return total


def _used_copies(N: int) -> list[tuple[HalfInt, int]]:
    classes = j_classes(N)
    used = [(classes[0], 1)]
    for j in classes[1:]:
        used += [(j, a) for a in range(1, j.dim + 1)]
    return used


def embed_reference(
    basis: SchurBasis, coefficients, m_assignment=None, *, top_m=None
) -> np.ndarray:
    """Alice's vector ``A_J |J,J> + sum_j sum_alpha A_j/sqrt(2j+1) |j alpha, m(alpha)>``.

    ``m_assignment`` is used as given (not checked for injectivity) so that
    negative controls can be built.
    """
    N = basis.n_spins
    classes = j_classes(N)
    A = np.asarray(coefficients, dtype=float)
    J = classes[0]
    given = {} if m_assignment is None else {as_halfint(k): v for k, v in m_assignment.items()}
    vec = A[0] * basis.vector(J, 1, J.fraction if top_m is None else Fraction(top_m))
    for a, j in zip(A[1:], classes[1:]):
        ms = given.get(j, default_m_assignment(j))
        for alpha, m in enumerate(ms, start=1):
            vec = vec + a / math.sqrt(j.dim) * basis.vector(j, alpha, Fraction(m))
    return vec


def ml_vector(basis: SchurBasis, m_assignment=None, weights=None) -> np.ndarray:
    """Bob's ML seed ``sqrt(2J+1)|J,J> + sum_j sum_alpha sqrt(2j+1)|j alpha, m(alpha)>``.

    ``weights`` maps a class j to a replacement for ``sqrt(2j+1)`` (negative controls).
    """
    N = basis.n_spins
    classes = j_classes(N)
    given = {} if m_assignment is None else {as_halfint(k): v for k, v in m_assignment.items()}
    weights = {} if weights is None else {as_halfint(k): v for k, v in weights.items()}
    J = classes[0]
    vec = weights.get(J, math.sqrt(J.dim)) * basis.vector(J, 1, J.fraction)
    for j in classes[1:]:
        wj = weights.get(j, math.sqrt(j.dim))
        for alpha, m in enumerate(given.get(j, default_m_assignment(j)), start=1):
            vec = vec + wj * basis.vector(j, alpha, Fraction(m))
    return vec


def subspace_K_projector(basis: SchurBasis) -> np.ndarray:
    P = np.zeros((2**basis.n_spins,) * 2, dtype=complex)
    for j, alpha in _used_copies(basis.n_spins):
        Bk = basis.block(j, alpha)
        P += Bk @ Bk.conj().T
    return P


def _inverse_quats(q: np.ndarray) -> np.ndarray:
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def full_amplitude(state: ReferenceState, g, basis: SchurBasis | None = None) -> np.ndarray:
    """``<B| U_g^dag |A>`` evaluated with explicit 2^N vectors."""
    N = state.n_spins
    basis = basis or schur_basis(N)
    A = embed_reference(basis, state.coefficients, state.m_assignment)
    B = ml_vector(basis, state.m_assignment)
    q = np.atleast_2d(_quats(g))
    rotated = apply_tensor_rotation(N, _inverse_quats(q), A)
    return rotated @ B.conj()


def full_likelihood(state: ReferenceState, g, basis: SchurBasis | None = None) -> np.ndarray:
    return np.abs(full_amplitude(state, g, basis)) ** 2


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
            "detail": self.detail,
        }


def _check(name, value, threshold, detail="", *, above=False) -> OracleCheck:
    passed = value > threshold if above else value < threshold
    return OracleCheck(name, float(value), float(threshold), bool(passed), detail)


def verify_orthonormality(N: int) -> OracleCheck:
    V = schur_basis(N).matrix
    dev = np.max(np.abs(V.conj().T @ V - np.eye(2**N)))
    return _check("schur_orthonormality", dev, 1e-12)


def verify_multiplicities(N: int) -> OracleCheck:
    basis = schur_basis(N)
    bad = [str(j) for j in j_classes(N) if basis.n_copies(j) != multiplicity(N, j)]
    return _check("copies_match_multiplicity", len(bad), 0.5, ",".join(bad))


def verify_casimir(N: int) -> OracleCheck:
    basis = schur_basis(N)
    S2 = total_spin_squared(N)
    expect = np.diag([j.value * (j.value + 1) for j, _, _ in basis.labels])
    dev = np.max(np.abs(basis.matrix.conj().T @ S2 @ basis.matrix - expect))
    return _check("casimir_diagonal", dev, 1e-10)


def verify_block_action(N: int, samples: int = 20, seed: int = 0) -> OracleCheck:
    """``<j alpha, n|U_g|j beta, m> = delta_{alpha beta} D^j_{nm}(g)`` on random rotations."""
    from .su2 import haar_quaternions

    basis = schur_basis(N)
    rng = np.random.default_rng(seed)
    q = haar_quaternions(rng, samples)
    U = tensor_rotation(N, q)
    V = basis.matrix
    rep = V.conj().T @ U @ V
    expect = np.zeros_like(rep)
    labels = basis.labels
    for j in j_classes(N):
        D = wigner_D(j, q)
        for alpha in range(1, basis.n_copies(j) + 1):
            idx = np.array([basis.index(j, alpha, Fraction(t, 2)) for t in range(-j.twice, j.twice + 1, 2)])
            expect[:, idx[:, None], idx[None, :]] = D
    dev = float(np.max(np.abs(rep - expect)))
    return _check("block_action", dev, 1e-9, f"{len(labels)} basis vectors, {samples} rotations")


def verify_likelihood(N: int, samples: int = 1000, seed: int = 0, state=None) -> OracleCheck:
    """Closed-form likelihood vs ``|<B|U_g^dag|A>|^2`` in the full space."""
    from .su2 import haar_quaternions

    _check_n(N)
    state = state or ReferenceState.optimal(N)
    q = haar_quaternions(np.random.default_rng(seed), samples)
    fast = LikelihoodModel(state)(q)
    slow = full_likelihood(state, q)
    dev = float(np.max(np.abs(fast - slow)))
    return _check("likelihood_closed_form", dev, 1e-9, f"{samples} Haar rotations")


def _chunks(n: int, size: int = 8192):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def completeness_residual(N: int, grid=32, weights=None) -> float:
    _check_n(N, MAX_QUADRATURE_SPINS)
    if N < 2:
        raise ValueError("need N >= 2")
    basis = schur_basis(N)
    B = ml_vector(basis, weights=weights)
    nodes, wts = haar_grid(grid)
    S = np.zeros((2**N, 2**N), dtype=complex)
    for sl in _chunks(len(nodes)):
        v = apply_tensor_rotation(N, nodes[sl], B)
        S += np.einsum("n,na,nb->ab", wts[sl], v, v.conj())
    return float(np.max(np.abs(S - subspace_K_projector(basis))))


def verify_completeness(N: int, grid=32, weights=None) -> OracleCheck:
    """``|| int U_g |B><B| U_g^dag dg - P_K ||_max`` (entrywise)."""
    res = completeness_residual(N, grid, weights)
    return _check("povm_completeness", res, 1e-6, f"grid {grid}")


def M_from_quadrature(N: int, grid=32) -> np.ndarray:
    """``M_jl = int chi_1(g) Re(conj(amp_j) amp_l) dg`` with unit states on classes j, l."""
    _check_n(N, MAX_QUADRATURE_SPINS)
    basis = schur_basis(N)
    classes = j_classes(N)
    B = ml_vector(basis)
    units = []
    for k in range(len(classes)):
        A = np.zeros(len(classes))
        A[k] = 1.0
        units.append(embed_reference(basis, A))
    nodes, wts = haar_grid(grid)
    K = len(classes)
    M = np.zeros((K, K))
    for sl in _chunks(len(nodes)):
        inv = _inverse_quats(nodes[sl])
        amps = np.stack([apply_tensor_rotation(N, inv, a) @ B.conj() for a in units])
        wchi = wts[sl] * character(1, nodes[sl])
        M += np.einsum("n,jn,ln->jl", wchi, amps.conj(), amps).real
    return M


def verify_M_entries(N: int, grid=32) -> tuple[OracleCheck, OracleCheck]:
    """Entrywise comparison of the quadrature matrix against :func:`build_M`."""
    M = M_from_quadrature(N, grid)
    dense = build_M(N).to_dense()
    dev = float(np.max(np.abs(M - dense)))
    K = M.shape[0]
    far = [abs(M[a, b]) for a in range(K) for b in range(K) if abs(a - b) >= 2]
    off = max(far, default=0.0)
    return (
        _check("M_entries", dev, 1e-6, f"grid {grid}"),
        _check("M_off_tridiagonal", off, 1e-8, f"{len(far)} entries"),
    )


def verify_iso_orthogonality(N: int, coefficients=None, m_assignment=None) -> OracleCheck:
    """Largest ``|<psi_alpha|T_{alpha beta}|psi_beta>|`` over distinct copies of each class.

    ``psi_alpha`` is the projection of Alice's vector onto copy ``alpha``.  Also checks
    ``<psi|T_{alpha alpha}|psi> = |psi|^2``.
    """
    basis = schur_basis(N)
    classes = j_classes(N)
    A = ReferenceState.optimal(N).coefficients if coefficients is None else coefficients
    vec = embed_reference(basis, A, m_assignment)
    worst = 0.0
    self_dev = 0.0
    for j in classes[1:]:
        copies = range(1, j.dim + 1)
        comps = {}
        for a in copies:
            Bk = basis.block(j, a)
            comps[a] = Bk @ (Bk.conj().T @ vec)
        for a in copies:
            T_aa = iso_transfer(basis, j, a, a).matrix
            self_dev = max(self_dev, abs(comps[a].conj() @ T_aa @ comps[a] - np.vdot(comps[a], comps[a])))
            for b in copies:
                if a != b:
                    T = iso_transfer(basis, j, a, b).matrix
                    worst = max(worst, abs(comps[a].conj() @ T @ comps[b]))
    return _check("iso_orthogonality", max(worst, self_dev), 1e-12, f"self-overlap deviation {self_dev:.1e}")


def schmidt_spectra(N: int, coefficients=None) -> dict[HalfInt, np.ndarray]:
    """Schmidt coefficients of each class component of Alice's vector across H_j (x) M_j."""
    basis = schur_basis(N)
    A = ReferenceState.optimal(N).coefficients if coefficients is None else coefficients
    vec = embed_reference(basis, A)
    out = {}
    for j in j_classes(N):
        n = basis.n_copies(j)
        C = np.column_stack([basis.block(j, a).conj().T @ vec for a in range(1, n + 1)])
        norm = np.linalg.norm(C)
        s = np.linalg.svd(C / norm, compute_uv=False) if norm > 0 else np.zeros(min(C.shape))
        out[j] = s
    return out


def verify_entanglement_structure(N: int) -> OracleCheck:
    """Each class j < J is maximally entangled (2j+1 equal coefficients); class J is rank one."""
    spectra = schmidt_spectra(N)
    classes = j_classes(N)
    dev = 0.0
    J = classes[0]
    sJ = spectra[J]
    dev = max(dev, abs(sJ[0] - 1), float(np.max(sJ[1:], initial=0.0)))
    for j in classes[1:]:
        s = spectra[j]
        target = np.zeros_like(s)
        target[: j.dim] = 1 / math.sqrt(j.dim)
        dev = max(dev, float(np.max(np.abs(s - target))))
    return _check("schmidt_uniform", dev, 1e-10)


def verify_orbit_dimension(N: int) -> OracleCheck:
    basis = schur_basis(N)
    rank = int(round(np.trace(subspace_K_projector(basis)).real))
    return _check("dim_K_equals_orbit_dimension", abs(rank - orbit_dimension(N)), 0.5, f"dim K = {rank}")


def run_all(N: int, grid=32, seed: int = 0) -> list[OracleCheck]:
    """Every oracle check applicable to N (quadrature checks only for N <= 4)."""
    _check_n(N)
    checks = [
        verify_orthonormality(N),
        verify_multiplicities(N),
        verify_casimir(N),
        verify_block_action(N, seed=seed),
    ]
    if N >= 2:
        checks += [
            verify_orbit_dimension(N),
            verify_likelihood(N, seed=seed),
            verify_iso_orthogonality(N),
            verify_entanglement_structure(N),
        ]
    if 2 <= N <= MAX_QUADRATURE_SPINS:
        checks.append(verify_completeness(N, grid))
        J = HalfInt(N)
        checks.append(
            _check(
                "povm_completeness_negative_control",
                completeness_residual(N, grid, weights={J: 1.0}),
                1e-2,
                "weight sqrt(2J+1) replaced by 1",
                above=True,
            )
        )
        checks.extend(verify_M_entries(N, grid))
    return checks
