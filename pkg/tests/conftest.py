import numpy as np
import pytest
from scipy.linalg import expm

from spinframes.su2 import HalfInt, haar_quaternions


def spin_matrices(j: HalfInt):
    """Jx, Jy, Jz in the m = -j..j ordering, built from ladder operators."""
    m = j.m_values()
    jv = j.value
    # J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
    jp = np.diag(np.sqrt(jv * (jv + 1) - m[:-1] * (m[:-1] + 1)), -1).astype(complex)
    jm = jp.conj().T
    return (jp + jm) / 2, (jp - jm) / 2j, np.diag(m).astype(complex)


def expm_wigner(j: HalfInt, alpha, beta, gamma):
    """exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz): an oracle independent of the sum formula."""
    _, jy, jz = spin_matrices(j)
    return expm(-1j * alpha * jz) @ expm(-1j * beta * jy) @ expm(-1j * gamma * jz)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_quats(rng):
    return haar_quaternions(rng, 64)
