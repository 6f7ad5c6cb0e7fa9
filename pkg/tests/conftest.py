import numpy as np
import pytest

from longresolvent import LongResolventPencil, MatrixPolynomial


@pytest.fixture
def parallel_pencil():
    """d=2 pencil of f(z) = z1 z2 / (z1 + z2)."""
    A0 = np.zeros((2, 2))
    A1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
    A2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    return LongResolventPencil(2, 1, 1, (A0, A1, A2), "real_homogeneous")


@pytest.fixture
def knese_family():
    """p = 2 - z1 - z2, q = 2 z1 z2 - z1 - z2, psi_k = sqrt(2)(1 - z_other)."""
    r2 = np.sqrt(2.0)
    p = MatrixPolynomial.from_terms(2, {
        (0, 0): [[2.0]], (1, 0): [[-1.0]], (0, 1): [[-1.0]]})
    q = MatrixPolynomial.from_terms(2, {
        (1, 1): [[2.0]], (1, 0): [[-1.0]], (0, 1): [[-1.0]]})
    psi1 = MatrixPolynomial.from_terms(2, {(0, 0): [[r2]], (0, 1): [[-r2]]})
    psi2 = MatrixPolynomial.from_terms(2, {(0, 0): [[r2]], (1, 0): [[-r2]]})
    return p, q, [psi1, psi2]


def crandn(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape)
                    + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def crandn_fn():
    return crandn
