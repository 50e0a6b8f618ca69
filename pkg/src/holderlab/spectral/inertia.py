"""Matrix inertia by symmetric-indefinite LDL^T (Sylvester's law)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from ..kernels import bk_inertia_stats

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class InertiaReport:
    n_minus: int
    n_zero: int
    n_plus: int
    degenerate: bool
    bandwidth: int
    window: int
    constrained_pivots: int
    two_by_two: int
    max_front: int
    ordering: str

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.n_minus, self.n_zero, self.n_plus)

    def as_dict(self) -> dict:
        return dict(vars(self))


def bandwidth(A: sp.csr_matrix) -> int:
    coo = A.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.abs(coo.row - coo.col).max())


def _permute(A: sp.csr_matrix, perm: np.ndarray) -> sp.csr_matrix:
    return A[perm][:, perm].tocsr()


def band_ordering(A: sp.csr_matrix, coords: np.ndarray | None = None) -> tuple[np.ndarray, str]:
    """Pick the smallest-bandwidth permutation among RCM and coordinate sweeps."""
    n = A.shape[0]
    cands = {"natural": np.arange(n)}
    if A.nnz:
        cands["rcm"] = np.asarray(reverse_cuthill_mckee(A, symmetric_mode=True), dtype=np.int64)
    if coords is not None:
        cands["sweep-x"] = np.lexsort((coords[:, 1], coords[:, 0]))
        cands["sweep-y"] = np.lexsort((coords[:, 0], coords[:, 1]))
    best, best_bw = None, None
    for name, perm in cands.items():
        bw = bandwidth(_permute(A, perm)) if name != "natural" else bandwidth(A)
        if best_bw is None or bw < best_bw:
            best, best_bw = name, bw
    return cands[best], best


def inertia_report(A, tol: float = ZERO_TOL, ordering: str | np.ndarray = "auto",
                   coords: np.ndarray | None = None, use_numba: bool | None = None) -> InertiaReport:
    A = sp.csr_matrix(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    A.eliminate_zeros()
    scale = float(np.abs(A.data).max()) if A.nnz else 0.0
    if scale == 0.0:
        return InertiaReport(0, n, 0, False, 0, 0, 0, 0, 0, "trivial")
    asym = abs(A - A.T)
    if asym.nnz and asym.max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    if isinstance(ordering, str):
        if ordering == "auto":
            perm, name = band_ordering(A, coords)
        elif ordering == "natural":
            perm, name = np.arange(n), "natural"
        elif ordering == "rcm":
            perm, name = np.asarray(reverse_cuthill_mckee(A, symmetric_mode=True)), "rcm"
        else:
            raise ValueError(f"unknown ordering {ordering!r}")
    else:
        perm, name = np.asarray(ordering, dtype=np.int64), "given"
    B = _permute(A, perm)
    B.sort_indices()
    bw = bandwidth(B)
    W = min(n, 2 * bw + 2)
    st = bk_inertia_stats(B.indptr, B.indices, B.data, n, W, tol * scale, use_numba=use_numba)
    return InertiaReport(int(st[0]), int(st[1]), int(st[2]), bool(st[3]), bw, W,
                         int(st[4]), int(st[5]), int(st[6]), name)


def inertia(A, tol: float = ZERO_TOL, **kw) -> tuple[int, int, int]:
    """(n_minus, n_zero, n_plus) of a symmetric matrix."""
    return inertia_report(A, tol, **kw).triple
