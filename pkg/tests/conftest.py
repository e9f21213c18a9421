import numpy as np
import pytest


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(rng, dim, min_eig=1e-3):
    """Full-rank density matrix with all populations >= min_eig."""
    p = rng.dirichlet(np.ones(dim))
    p = (1.0 - dim * min_eig) * p + min_eig
    u = random_unitary(rng, dim)
    return (u * p) @ u.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
