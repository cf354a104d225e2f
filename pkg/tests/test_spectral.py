import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinframes.spectral import (
    ConvergenceError,
    TridiagonalSymmetric,
    asymptotic_error,
    baseline_error,
    build_M,
    build_T,
    leading_eigenpair,
    optimal_protocol,
    sigma_closed_form,
    sturm_count,
)
from spinframes.su2 import HalfInt

from oracles import baseline_lambda


def test_build_M_small():
    M = build_M(3)
    assert np.allclose(M.to_dense(), [[0.6, 0.5], [0.5, 1.0]])
    assert M.row_labels == (HalfInt(3), HalfInt(1))
    M2 = build_M(2)
    assert np.allclose(M2.to_dense(), [[0.5, 1 / math.sqrt(3)], [1 / math.sqrt(3), 0.0]])


@pytest.mark.parametrize("N", range(2, 30))
def test_build_M_pattern(N):
    M = build_M(N)
    J = N / 2
    assert M.size == N // 2 + 1
    assert M.diag[0] == pytest.approx(J / (J + 1))
    assert M.offdiag[0] == pytest.approx(1 / math.sqrt(N + 1))
    assert M.diag[-1] == N % 2
    assert np.all(M.diag[1:-1] == 1) and np.all(M.offdiag[1:] == 1)


def test_build_T_examples():
    assert np.allclose(build_T(5).to_dense(), [[1, 1], [1, 1]])
    assert np.allclose(build_T(4).to_dense(), [[1, 1], [1, 0]])
    assert build_T(2).size == 1


def test_build_rejects_small_n():
    for bad in (0, 1, -3):
        with pytest.raises(ValueError):
            build_M(bad)
    with pytest.raises(ValueError):
        build_M(2.5)


def test_tridiagonal_validation():
    with pytest.raises(ValueError):
        TridiagonalSymmetric(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        TridiagonalSymmetric(np.array([1.0, np.nan]), np.ones(1))
    M = build_M(6)
    with pytest.raises(ValueError):
        M.diag[0] = 5.0


def test_sigma_examples():
    assert sigma_closed_form(3) == pytest.approx(1.0, abs=1e-15)
    assert sigma_closed_form(7) == pytest.approx(1 + math.sqrt(2), abs=1e-14)
    N = 10**4
    taylor = 3 - 4 * math.pi**2 / (N + 1) ** 2 + (4 / 3) * math.pi**4 / (N + 1) ** 4
    assert abs(sigma_closed_form(N) - taylor) < 1e-12


@pytest.mark.parametrize("N", range(4, 41))
def test_sigma_matches_dense_eigenvalue_of_T(N):
    top = np.linalg.eigvalsh(build_T(N).to_dense())[-1]
    assert abs(sigma_closed_form(N) - top) < 1e-10


@pytest.mark.parametrize("N", range(2, 61))
def test_leading_eigenpair_matches_dense(N):
    M = build_M(N)
    lam, v = leading_eigenpair(M)
    w, V = np.linalg.eigh(M.to_dense())
    assert abs(lam - w[-1]) < 1e-10
    assert abs(abs(v @ V[:, -1]) - 1) < 1e-10
    assert np.linalg.norm(M.to_dense() @ v - lam * v) < 1e-10


tridiag = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        st.lists(st.floats(-5, 5), min_size=n - 1, max_size=n - 1),
    )
)


@settings(max_examples=200, deadline=None)
@given(tridiag)
def test_leading_eigenpair_random(data):
    d, e = data
    T = TridiagonalSymmetric(np.array(d), np.array(e))
    w = np.linalg.eigvalsh(T.to_dense())
    lam, v = leading_eigenpair(T, tol=1e-9)
    assert abs(lam - w[-1]) < 1e-8 * (1 + abs(w[-1]))
    assert abs(np.linalg.norm(v) - 1) < 1e-12


@settings(max_examples=100, deadline=None)
@given(tridiag, st.floats(-12, 12))
def test_sturm_count_matches_dense(data, x):
    d, e = data
    T = TridiagonalSymmetric(np.array(d), np.array(e))
    w = np.linalg.eigvalsh(T.to_dense())
    if np.min(np.abs(w - x)) < 1e-9:
        return
    assert sturm_count(T, x) == int(np.sum(w < x))


def test_leading_eigenpair_reports_nonconvergence():
    # degenerate top eigenvalue pair with a zero iteration budget
    T = TridiagonalSymmetric(np.array([1.0, 0.0, 1.0]), np.array([0.0, 0.0]))
    with pytest.raises(ConvergenceError):
        leading_eigenpair(T, max_iter=0)


def test_optimal_protocol_n2_closed_form():
    prot = optimal_protocol(2)
    # trace/determinant of [[1/2, 1/sqrt3], [1/sqrt3, 0]]
    assert prot.eigenvalue == pytest.approx((1 + math.sqrt(19 / 3)) / 4, abs=1e-14)
    assert np.all(prot.coefficients > 0)
    assert prot.coefficient(1) == pytest.approx(prot.coefficients[0])


@pytest.mark.parametrize("N", [3, 4, 10, 51, 200])
def test_optimal_protocol_perron_vector(N):
    prot = optimal_protocol(N)
    assert np.all(prot.coefficients >= 0)
    assert np.linalg.norm(prot.coefficients) == pytest.approx(1)
    assert prot.average_error == pytest.approx(6 - 2 * prot.eigenvalue)


def test_sandwich_over_range():
    for N in range(4, 201):
        lam = optimal_protocol(N).eigenvalue
        assert sigma_closed_form(N) - 1e-12 <= lam <= sigma_closed_form(N + 2) + 1e-12, N


def test_lambda_increases_and_stays_below_three():
    lams = [optimal_protocol(N).eigenvalue for N in range(2, 201)]
    assert all(b > a for a, b in zip(lams, lams[1:]))
    assert max(lams) < 3


@pytest.mark.parametrize("N", range(4, 201, 7))
def test_error_upper_bound_from_sandwich(N):
    err = optimal_protocol(N).average_error
    assert err <= 8 * math.sin(math.pi / (N + 1)) ** 2 + 1e-12


def test_asymptotic_helpers():
    assert asymptotic_error(2 * math.pi) == pytest.approx(2)
    assert baseline_error(8) == 1


def test_large_n_ratio_approaches_one():
    N = 200
    ratio = optimal_protocol(N).average_error / asymptotic_error(N)
    assert 0.9 < ratio <= 1.0


def test_baseline_oracle_agrees_without_multiplicity():
    # N = 2 has one copy of every class, so the single-copy optimum is the same problem
    assert baseline_lambda(2) == pytest.approx(optimal_protocol(2).eigenvalue, abs=1e-12)


@pytest.mark.parametrize("N", range(3, 8))
def test_multiplicity_beats_single_copy(N):
    assert optimal_protocol(N).eigenvalue > baseline_lambda(N)


def test_seventeen_percent_over_single_copy_at_n3():
    lam = optimal_protocol(3).eigenvalue
    base = baseline_lambda(3)
    print(f"lambda(3)={lam:.6f} single-copy={base:.6f} ratio={lam / base:.4f}")
    assert lam >= 1.17 * base
