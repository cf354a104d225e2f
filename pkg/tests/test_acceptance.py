"""Acceptance criteria, one test each.

Every test prints a single ``criterion k: PASS|FAIL (seconds) detail`` line, also
when pytest captures output.  ``python tests/test_acceptance.py`` prints the same
lines without pytest.
"""

import math
import sys
import time

import numpy as np
import pytest

from spinframes.oracle import (
    completeness_residual,
    schmidt_spectra,
    verify_likelihood,
    verify_M_entries,
)
from spinframes.protocol import LikelihoodModel, ReferenceState, monte_carlo_error
from spinframes.representation import clebsch_series, j_classes, multiplicity
from spinframes.spectral import build_T, leading_eigenpair, optimal_protocol, sigma_closed_form

PUBLISHED_LAMBDA = {3: 1.3886, 5: 2.0864, 9: 2.6294}


def criterion_1():
    got = {N: optimal_protocol(N).eigenvalue for N in PUBLISHED_LAMBDA}
    dev = {N: abs(got[N] - v) for N, v in PUBLISHED_LAMBDA.items()}
    detail = ", ".join(f"N={N}: {got[N]:.6f} vs {v} (|d|={dev[N]:.2e})" for N, v in PUBLISHED_LAMBDA.items())
    return all(d <= 5e-4 for d in dev.values()), detail


def criterion_2():
    worst = max(
        abs(leading_eigenpair(build_T(N))[0] - sigma_closed_form(N)) for N in range(4, 61)
    )
    return worst < 1e-10, f"max |lambda_max(T) - sigma| over N=4..60: {worst:.2e}"


def criterion_3():
    bad = []
    for N in range(4, 201):
        lam = optimal_protocol(N).eigenvalue
        if not sigma_closed_form(N) <= lam <= sigma_closed_form(N + 2):
            bad.append(N)
    return not bad, f"violations for N=4..200: {bad or 'none'}"


def _ratio(N):
    return (6 - 2 * optimal_protocol(N).eigenvalue) * N**2 / (8 * math.pi**2)


def criterion_4():
    r100 = _ratio(100)
    seq = [_ratio(N) for N in range(20, 201, 20)]
    mono = all(b > a for a, b in zip(seq, seq[1:])) and seq[-1] <= 1
    return 0.85 <= r100 <= 1.0 and mono, f"ratio(100)={r100:.5f}, increasing to {seq[-1]:.5f} at N=200: {mono}"


def criterion_5():
    bad = [N for N in range(5, 201) if not 6 - 2 * optimal_protocol(N).eigenvalue < 8 / N]
    detail = f"N where 6-2*lambda >= 8/N: {bad or 'none'}"
    if bad:
        N = bad[0]
        detail += f" (N={N}: {6 - 2 * optimal_protocol(N).eigenvalue:.4f} vs {8 / N:.4f})"
    return not bad, detail


def criterion_6():
    devs = {N: verify_likelihood(N, samples=1000, seed=N).value for N in (2, 3, 4)}
    return max(devs.values()) < 1e-9, ", ".join(f"N={N}: {d:.1e}" for N, d in devs.items())


def criterion_7():
    res = {N: completeness_residual(N, 32) for N in (2, 3)}
    neg = {N: completeness_residual(N, 32, weights={N / 2: 1.0}) for N in (2, 3)}
    ok = max(res.values()) < 1e-6 and min(neg.values()) > 1e-2
    return ok, f"residuals {res}, broken-weight residuals {neg}"


def criterion_8():
    parts = []
    ok = True
    for N in (2, 3, 4):
        entries, far = verify_M_entries(N, 32)
        ok &= entries.value < 1e-6 and far.value < 1e-8
        parts.append(f"N={N}: {entries.value:.1e}/{far.value:.1e}")
    return ok, "entry/off-tridiagonal deviation " + ", ".join(parts)


def criterion_9():
    ok = True
    parts = []
    for N in (3, 5):
        res = monte_carlo_error(LikelihoodModel(ReferenceState.optimal(N)), 10**5, seed=2024 + N)
        target = 6 - 2 * optimal_protocol(N).eigenvalue
        gap = abs(res.mean_error - target)
        ok &= gap < 4 * res.std_error
        parts.append(f"N={N}: {res.mean_error:.5f} vs {target:.5f} ({gap / res.std_error:.2f} SE)")
    return ok, ", ".join(parts)


def criterion_10():
    sums = all(sum(n * j.dim for j, n in clebsch_series(N)) == 2**N for N in range(1, 31))
    mult = multiplicity(3, 0.5) == 2
    dev = 0.0
    for N in range(2, 7):
        spectra = schmidt_spectra(N)
        for j in j_classes(N)[1:]:
            s = spectra[j][: j.dim]
            dev = max(dev, float(np.max(np.abs(s - 1 / math.sqrt(j.dim)))))
    return sums and mult and dev < 1e-10, f"sum rule N<=30: {sums}, n(3,1/2)=2: {mult}, Schmidt dev {dev:.1e}"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


def evaluate(k):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[k]()
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.2f}s) {detail}"
    return bool(ok), line


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, capsys):
    ok, line = evaluate(k)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
