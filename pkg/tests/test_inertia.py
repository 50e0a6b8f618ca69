import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from holderlab.spectral.inertia import bandwidth, inertia, inertia_report


def dense_signs(A, tol=1e-9):
    ev = np.linalg.eigvalsh(A)
    s = tol * max(1.0, np.abs(ev).max())
    return int((ev < -s).sum()), int((np.abs(ev) <= s).sum()), int((ev > s).sum())


def random_symmetric(rng, n, density, rank=None):
    if rank is not None:
        B = rng.standard_normal((n, rank))
        D = np.diag(rng.choice([-1.0, 1.0], rank))
        return B @ D @ B.T
    A = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    return A + A.T


@given(n=st.integers(1, 40), density=st.floats(0.05, 1.0), seed=st.integers(0, 10_000))
def test_inertia_matches_eigvalsh(n, density, seed):
    A = random_symmetric(np.random.default_rng(seed), n, density)
    assert inertia(sp.csr_matrix(A)) == dense_signs(A)


@given(n=st.integers(2, 30), rank=st.integers(1, 10), seed=st.integers(0, 10_000))
def test_rank_deficient(n, rank, seed):
    rank = min(rank, n - 1)
    A = random_symmetric(np.random.default_rng(seed), n, 1.0, rank)
    assert inertia(sp.csr_matrix(A), tol=1e-9) == dense_signs(A)


def test_zero_diagonal_forces_two_by_two():
    A = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    rep = inertia_report(A)
    assert rep.triple == (1, 0, 1)
    assert rep.two_by_two == 1


@pytest.mark.parametrize("ordering", ["natural", "rcm", "auto"])
def test_sylvester_invariance_under_ordering(rng, ordering):
    A = random_symmetric(rng, 60, 0.1)
    assert inertia(sp.csr_matrix(A), ordering=ordering) == dense_signs(A)


def test_congruence_invariance(rng):
    A = random_symmetric(rng, 25, 0.3)
    S = rng.standard_normal((25, 25)) + 5 * np.eye(25)
    assert inertia(sp.csr_matrix(S.T @ A @ S)) == inertia(sp.csr_matrix(A))


def test_tridiagonal_laplacian():
    n = 50
    L = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    ev = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    sigma = 1.3
    assert inertia(L - sigma * sp.identity(n))[0] == int((ev < sigma).sum())
    assert bandwidth(L) == 1


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        inertia(sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]])))


def test_zero_matrix():
    assert inertia(sp.csr_matrix((4, 4))) == (0, 4, 0)
