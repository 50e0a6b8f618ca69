"""P1 finite-element matrices for -Δ + λV."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..domain import HolderSubgraphDomain
from ..potentials import PotentialField
from ..quadrature import gauss_jacobi01, gauss_legendre01
from .mesh import Mesh

# Degree-4 rule on the reference triangle (barycentric, weights sum to 1)
_A1, _B1, _W1 = 0.445948490915965, 0.108103018168070, 0.223381589678011
_A2, _B2, _W2 = 0.091576213509771, 0.816847572980459, 0.109951743655322
DUNAVANT4_BARY = np.array([
    [_A1, _A1, _B1], [_A1, _B1, _A1], [_B1, _A1, _A1],
    [_A2, _A2, _B2], [_A2, _B2, _A2], [_B2, _A2, _A2],
])
DUNAVANT4_W = np.array([_W1] * 3 + [_W2] * 3)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    potential: sp.csr_matrix
    bc: str
    lam: float
    mesh: Mesh
    dofs: np.ndarray  # mesh vertices carrying a degree of freedom
    info: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.dofs.size)

    def shifted(self, sigma: float) -> sp.csr_matrix:
        """K + λP − σM."""
        return (self.stiffness + self.lam * self.potential - sigma * self.mass).tocsr()

    def with_lambda(self, lam: float) -> "DiscreteOperator":
        return DiscreteOperator(self.stiffness, self.mass, self.potential, self.bc, float(lam),
                                self.mesh, self.dofs, dict(self.info))

    def dof_coords(self) -> np.ndarray:
        return self.mesh.vertices[self.dofs]


def element_geometry(mesh: Mesh):
    p = mesh.vertices[mesh.triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    # gradients of barycentric coordinates
    rot = np.stack([p[:, 1] - p[:, 2], p[:, 2] - p[:, 0], p[:, 0] - p[:, 1]], axis=1)
    grads = np.stack([rot[..., 1], -rot[..., 0]], axis=-1) / (2 * area)[:, None, None]
    return p, area, grads


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


_MASS_REF = (np.ones((3, 3)) + np.eye(3)) / 12.0


def stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    _, area, g = element_geometry(mesh)
    return _scatter(mesh, area[:, None, None] * np.einsum("eik,ejk->eij", g, g))


def mass_matrix(mesh: Mesh) -> sp.csr_matrix:
    _, area, _ = element_geometry(mesh)
    return _scatter(mesh, area[:, None, None] * _MASS_REF[None])


def _local_potential_dunavant(dom, V, pts, area, sel):
    bary = DUNAVANT4_BARY
    q = np.einsum("qi,eid->eqd", bary, pts[sel])
    vals = V.evaluate(dom, q[..., 0], q[..., 1])
    return area[sel, None, None] * np.einsum("q,eq,qi,qj->eij", DUNAVANT4_W, vals, bary, bary)


def _local_potential_singular(dom, V, pts, area, hv, sel, npts=8):
    """Collapsed rule from the vertex of smallest height, exact in the power-law weight.

    h is affine on each element, so with Duffy coordinates (s, t) anchored at the
    low vertex h = s·(h_b(1−t) + h_c t) once h_low = 0; the s-weight is then s^α.
    """
    coef, alpha = V.h_power
    sj, wj = gauss_jacobi01(npts, alpha + 1.0)  # s^(α+1): power law times Duffy Jacobian
    tg, wg = gauss_legendre01(npts)
    S, Tt = np.meshgrid(sj, tg, indexing="ij")
    Wt = np.outer(wj, wg)
    order = np.argsort(hv[sel], axis=1)
    hs = np.take_along_axis(hv[sel], order, axis=1)
    g = hs[:, 1, None, None] * (1 - Tt) + hs[:, 2, None, None] * Tt
    vals = coef * g**alpha
    lam_sorted = np.stack([np.broadcast_to(1 - S, g.shape), S * (1 - Tt) + 0 * g, S * Tt + 0 * g], axis=1)
    lam = np.empty_like(lam_sorted)
    np.put_along_axis(lam, order[:, :, None, None], lam_sorted, axis=1)
    return 2 * area[sel, None, None] * np.einsum("st,est,eist,ejst->eij", Wt, vals, lam, lam)


def potential_matrix(mesh: Mesh, dom: HolderSubgraphDomain, V: PotentialField) -> tuple[sp.csr_matrix, dict]:
    """∫ V φ_i φ_j; exact for constants, collapsed Gauss–Jacobi on graph-touching elements."""
    n = mesh.n_vertices
    info = {"rule": "dunavant4", "singular_elements": 0}
    if V.is_zero:
        return sp.csr_matrix((n, n)), info
    pts, area, _ = element_geometry(mesh)
    if V.kind == "constant" and V.support == "omega":
        info["rule"] = "exact"
        return float(V.params["value"]) * mass_matrix(mesh), info
    local = np.zeros((mesh.n_triangles, 3, 3))
    singular = np.zeros(mesh.n_triangles, dtype=bool)
    if V.kind == "h_power" and V.h_power[1] != 0:
        hv = dom.height(pts[..., 0], pts[..., 1])
        in_chart = np.all(pts[..., 1] >= -1e-14, axis=1)
        tiny = 1e-12 * max(1.0, dom.f_max())
        singular = in_chart & (hv.min(axis=1) <= tiny)
        hv = np.where(hv < tiny, 0.0, hv)
        idx = np.flatnonzero(singular)
        if idx.size:
            local[idx] = _local_potential_singular(dom, V, pts, area, hv, idx)
        info["singular_elements"] = int(idx.size)
    regular = np.flatnonzero(~singular)
    if regular.size:
        local[regular] = _local_potential_dunavant(dom, V, pts, area, regular)
    return _scatter(mesh, local), info


def assemble(mesh: Mesh, dom: HolderSubgraphDomain, V: PotentialField, lam: float = 1.0,
             bc: str = "neumann") -> DiscreteOperator:
    if bc not in ("neumann", "dirichlet"):
        raise ValueError("bc must be 'neumann' or 'dirichlet'")
    K = stiffness_matrix(mesh)
    M = mass_matrix(mesh)
    P, info = potential_matrix(mesh, dom, V)
    dofs = np.arange(mesh.n_vertices) if bc == "neumann" else np.flatnonzero(~mesh.boundary)
    if bc == "dirichlet":
        K, M, P = (A[dofs][:, dofs].tocsr() for A in (K, M, P))
    return DiscreteOperator(K, M, P, bc, float(lam), mesh, dofs, info)
