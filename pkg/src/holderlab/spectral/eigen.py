"""Counting eigenvalues by inertia, bisection, and the Poincaré-type estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.sparse.linalg import splu
from scipy.stats import theilslopes

from ..domain import HolderSubgraphDomain, build_domain
from ..potentials import zero_potential
from .assembly import DUNAVANT4_BARY, DUNAVANT4_W, DiscreteOperator, assemble, element_geometry
from .inertia import inertia_report
from .mesh import triangulate

SIGMA_NUDGE = 1e-10


@dataclass
class CountReport:
    count: int
    lam: float
    sigma: float
    sigma_used: float
    inertia: tuple[int, int, int]
    bc: str
    mesh: dict
    degenerate: bool = False
    semiclassical: float | None = None
    bound: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out["inertia"] = list(self.inertia)
        return out


def count_report(op: DiscreteOperator, sigma: float = 0.0, use_numba: bool | None = None) -> CountReport:
    """n_minus(K + λP − σM) with σ nudged down when it hits an eigenvalue."""
    coords = op.dof_coords()
    s = float(sigma)
    rep = inertia_report(op.shifted(s), coords=coords, use_numba=use_numba)
    if rep.n_zero > 0:
        s = sigma - SIGMA_NUDGE * (1 + abs(sigma))
        rep = inertia_report(op.shifted(s), coords=coords, use_numba=use_numba)
    return CountReport(rep.n_minus, op.lam, float(sigma), s, rep.triple, op.bc,
                       {"dofs": op.size, "target_h": op.mesh.target_h, "bandwidth": rep.bandwidth},
                       degenerate=rep.degenerate or rep.n_zero > 0)


def count_below(op: DiscreteOperator, sigma: float = 0.0) -> int:
    """Number of discrete eigenvalues of −Δ + λV strictly below sigma."""
    return count_report(op, sigma).count


def lowest_eigenvalues(op: DiscreteOperator, k: int, tol: float = 1e-8) -> np.ndarray:
    """k smallest generalized eigenvalues by bisection on the count.

    Each value is bracketed to width tol·max(1, |σ|); multiplicities repeat.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > op.size:
        raise ValueError("k exceeds the number of degrees of freedom")
    cache: dict[float, int] = {}

    def cnt(s):
        if s not in cache:
            cache[s] = count_below(op, s)
        return cache[s]

    lo = -1.0
    while cnt(lo) > 0:
        lo *= 2.0
    hi = 1.0
    while cnt(hi) < k:
        hi *= 2.0
    out = []
    a = lo
    for i in range(1, k + 1):
        b = min((s for s, c in cache.items() if c >= i), default=hi)
        a = max((s for s, c in cache.items() if c < i and s < b), default=a)
        while b - a > tol * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if cnt(mid) >= i:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return np.array(out)


# --- Poincaré constant on hat domains ---------------------------------------

def hat_domain(delta: float, width_frac: float = 0.5, base_frac: float = 1 / 3,
               spike_frac: float = 0.5) -> HolderSubgraphDomain:
    """Width width_frac·δ, flat top at base_frac·δ with one tent spike over the middle half."""
    a = width_frac * delta
    b, s = base_frac * delta, spike_frac * delta
    pts = [[0, b], [a / 4, b], [a / 2, b + s], [3 * a / 4, b], [a, b]]
    return build_domain({"samples": pts, "gamma": 1.0})


@dataclass
class PoincareFit:
    deltas: list
    mu2: list
    slope: float
    c_poincare: float

    def as_dict(self) -> dict:
        return dict(vars(self))


def second_neumann_eigenvalue(dom: HolderSubgraphDomain, target_h: float, tol: float = 1e-7) -> float:
    op = assemble(triangulate(dom, target_h), dom, zero_potential(), 0.0, "neumann")
    return float(lowest_eigenvalues(op, 2, tol)[1])


def estimate_poincare_constant(dom_template: Callable[[float], HolderSubgraphDomain],
                               delta_grid: Sequence[float], h_per_delta: float = 1 / 32) -> PoincareFit:
    """Fit ln μ₂ against ln δ; C_P is the smallest μ₂·δ² on the grid."""
    deltas = [float(d) for d in delta_grid]
    if len(deltas) < 3:
        raise ValueError("need at least 3 delta values for a slope fit")
    mu2 = [second_neumann_eigenvalue(dom_template(d), h_per_delta * d) for d in deltas]
    slope = theilslopes(np.log(mu2), np.log(deltas))[0]
    cp = min(m * d * d for m, d in zip(mu2, deltas))
    return PoincareFit(deltas, mu2, float(slope), float(cp))


# --- Poincaré–Sobolev functional ----------------------------------------------

@dataclass
class PSResult:
    value: float
    values_per_start: list
    converged: bool
    iterations: int
    message: str

    def as_dict(self) -> dict:
        return dict(vars(self))


def _second_eigvec(K: sp.csr_matrix, M: sp.csr_matrix, proj, iters: int = 60) -> np.ndarray:
    shift = 1e-8 * abs(K.diagonal()).max()
    lu = splu((K + shift * M).tocsc())
    v = proj(np.cos(np.arange(K.shape[0])))
    for _ in range(iters):
        v = proj(lu.solve(M @ v))
        v /= np.linalg.norm(v)
    return v


def ps_functional(op: DiscreteOperator, qstar: float):
    """Return (f, grad, proj) for ln(uᵀKu) − (2/q)·ln∫|u|^q with u = Πz mean-zero."""
    mesh = op.mesh
    _, area, _ = element_geometry(mesh)
    K, M = op.stiffness, op.mass
    m = np.asarray(M.sum(axis=1)).ravel()
    msum = m.sum()
    tri = mesh.triangles
    bary = DUNAVANT4_BARY
    wq = area[:, None] * DUNAVANT4_W[None, :]
    n = mesh.n_vertices

    def proj(z):
        return z - (m @ z) / msum

    def proj_t(g):
        return g - m * (g.sum() / msum)

    def fg(z):
        u = proj(z)
        E = float(u @ (K @ u))
        uq = u[tri] @ bary.T  # (elements, points)
        Q = float(np.sum(wq * np.abs(uq) ** qstar))
        if E <= 0 or Q <= 0:
            return math.inf, np.zeros_like(z)
        dQ_pts = qstar * wq * np.abs(uq) ** (qstar - 2) * uq
        dQ = np.bincount(tri.ravel(), weights=(dQ_pts @ bary).ravel(), minlength=n)
        g = 2 * (K @ u) / E - (2 / qstar) * dQ / Q
        return math.log(E) - (2 / qstar) * math.log(Q), proj_t(g)

    return fg, proj


def estimate_ps_constant(dom: HolderSubgraphDomain, qstar: float, target_h: float,
                         max_iter: int = 500, seeds: Sequence[int] = (0, 1, 2, 3, 4),
                         rng: np.random.Generator | None = None) -> PSResult:
    """Best value of ‖∇u‖² / ‖u‖²_{q*} over discrete mean-zero u (an upper estimate of the minimum).

    L-BFGS from the second Neumann eigenvector and from random starts.
    """
    if qstar < 2:
        raise ValueError("qstar must be >= 2")
    op = assemble(triangulate(dom, target_h), dom, zero_potential(), 0.0, "neumann")
    fg, proj = ps_functional(op, qstar)
    starts = [_second_eigvec(op.stiffness, op.mass, proj)]
    for s in seeds:
        g = rng if rng is not None else np.random.default_rng(s)
        starts.append(proj(g.standard_normal(op.size)))
    vals, its, ok, msg = [], 0, True, ""
    for z0 in starts:
        res = minimize(fg, z0 / np.linalg.norm(z0), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-9, "ftol": 1e-13})
        vals.append(float(math.exp(res.fun)))
        its = max(its, int(res.nit))
        if not res.success and res.nit >= max_iter:
            ok, msg = False, str(res.message)
    return PSResult(min(vals), vals, ok, its, msg or "ok")
