"""Weyl-law scans, Dirichlet–Neumann cube bracketing and CLR-bound diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import theilslopes

from ._accel import parallel_map
from .domain import HolderSubgraphDomain
from .exponents import ExponentSet, compute_exponents, delta0
from .norms import combined_norm, lp_norm
from .potentials import PotentialField, tent_support
from .spectral import assemble, count_report, rectangle_mesh, triangulate

POINTS_PER_WAVELENGTH = 8


class ResolutionError(ValueError):
    """Mesh too coarse for the shortest de Broglie wavelength of the scan."""

    def __init__(self, mesh_h: float, required: float):
        super().__init__(f"mesh_h = {mesh_h} does not resolve the wavelength; need mesh_h <= {required:.6g}")
        self.mesh_h = mesh_h
        self.required = required


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def weyl_constant(d: int = 2) -> float:
    """(2π)^{−d}|B₁|; 1/(4π) for d = 2."""
    return unit_ball_volume(d) / (2 * math.pi) ** d


def semiclassical_count(V: PotentialField, dom: HolderSubgraphDomain, lam: float, d: int = 2,
                        quad_res: int = 4) -> float:
    """(2π)^{−d}|B₁| λ^{d/2} ∫_Ω |V|^{d/2}; inf when the integral diverges."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if lam == 0 or V.is_zero:
        return 0.0
    integral = lp_norm(V, dom, d / 2, quad_res) ** (d / 2)
    return weyl_constant(d) * lam ** (d / 2) * integral


def square_neumann_count(lam: float, side: float = 1.0) -> int:
    """#{(j, k) ≥ 0 : π²(j² + k²)/side² < λ}."""
    return _lattice_count(lam, side, 0)


def square_dirichlet_count(lam: float, side: float = 1.0) -> int:
    """#{(j, k) ≥ 1 : π²(j² + k²)/side² < λ}."""
    return _lattice_count(lam, side, 1)


def _lattice_count(lam, side, start):
    if lam <= 0:
        return 0
    r = math.sqrt(lam) * side / math.pi
    j = np.arange(start, int(r) + 2)
    jj, kk = np.meshgrid(j, j)
    return int(np.count_nonzero(jj**2 + kk**2 < r * r))


def required_mesh_h(lam_max: float, sup_v: float, d: int = 2) -> float:
    if lam_max * sup_v <= 0:
        return math.inf
    return 2 * math.pi / math.sqrt(lam_max * sup_v) / POINTS_PER_WAVELENGTH


def check_resolution(mesh_h: float, lam_max: float, V: PotentialField, dom: HolderSubgraphDomain) -> float:
    need = required_mesh_h(lam_max, V.sup_abs(dom))
    if mesh_h > need * (1 + 1e-12):
        raise ResolutionError(mesh_h, need)
    return need


@dataclass
class WeylScanRow:
    lam: float
    fem_count: int
    semiclassical: float
    ratio: float
    clr_bound: float
    mesh_h: float

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "fem_count": self.fem_count, "semiclassical": self.semiclassical,
                "ratio": self.ratio, "clr_bound": self.clr_bound, "mesh_h": self.mesh_h}


def _clr_scale(V, dom, es, lam, quad_res):
    """δ₀(λV)^{−d}, using ‖λV‖ = λ‖V‖."""
    norm = combined_norm(V, dom, es, quad_res)
    if math.isinf(norm):
        return math.inf
    d0 = delta0(lam * norm, dom.h_omega, es.d)
    return d0 ** (-es.d)


def weyl_scan(dom: HolderSubgraphDomain, V: PotentialField, lambda_grid: Sequence[float], mesh_h: float,
              bc: str = "neumann", quad_res: int = 4, es: ExponentSet | None = None,
              workers: int | None = None) -> list[WeylScanRow]:
    """Count N(−Δ + λV) at each λ on one mesh; ratio = count/λ^{d/2}."""
    lams = [float(x) for x in lambda_grid]
    if not lams or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] <= 0:
        raise ValueError("lambda_grid must be positive and strictly increasing")
    check_resolution(mesh_h, lams[-1], V, dom)
    mesh = triangulate(dom, mesh_h)
    op = assemble(mesh, dom, V, 1.0, bc)
    es = es or compute_exponents(2, dom.gamma, dom.c)
    d = 2

    def job(lam):
        rep = count_report(op.with_lambda(lam), 0.0)
        sc = semiclassical_count(V, dom, lam, d, quad_res)
        clr = _clr_scale(V, dom, es, lam, quad_res) if not V.is_zero else 0.0
        return WeylScanRow(lam, rep.count, sc, rep.count / lam ** (d / 2), clr, float(mesh_h))

    return parallel_map(job, lams, workers)


# --- cube bracketing ------------------------------------------------------------

@dataclass
class BracketResult:
    sum_dirichlet: int
    global_count: int
    sum_neumann: int
    m_level: int
    lam: float
    cubes: int
    mesh_h: float
    support_gap: float
    support_gap_required: float

    @property
    def sandwich(self) -> bool:
        return self.sum_dirichlet <= self.global_count <= self.sum_neumann

    @property
    def gaps(self) -> tuple[int, int]:
        return self.global_count - self.sum_dirichlet, self.sum_neumann - self.global_count

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out.update(sandwich=self.sandwich, gaps=list(self.gaps),
                   support_gap_ok=self.support_gap > self.support_gap_required)
        return out


def _support_box(W: PotentialField):
    if W.kind == "tent":
        return tent_support(W)
    if W.kind == "grid":
        return tuple(W.params["box"])
    return None


def bracketing_check(dom: HolderSubgraphDomain, W: PotentialField, m_level: int, lam: float, mesh_h: float,
                     require_gap: bool = False, sigma: float = 0.0) -> BracketResult:
    """Σ_j N_D(Q_j) ≤ N_N(Ω) ≤ Σ_j N_N(Q_j) on meshes aligned to the 2^{−m} cube grid.

    The domain must be a flat rectangle whose sides are multiples of 2^{−m}. W must
    have compact support inside Ω; the distance condition √d·2^{−m} is enforced
    only with ``require_gap``.
    """
    if dom.kind != "flat" or dom.base:
        raise ValueError("bracketing needs a flat rectangular domain without base box")
    side = 2.0 ** (-m_level)
    x0, x1 = dom.x_range
    height = float(dom.fs[0])
    nx, ny = (x1 - x0) / side, height / side
    if abs(nx - round(nx)) > 1e-9 or abs(ny - round(ny)) > 1e-9 or x0 / side != round(x0 / side):
        raise ValueError("domain sides must be integer multiples of the cube side")
    nx, ny = int(round(nx)), int(round(ny))
    box = _support_box(W)
    if box is None:
        raise ValueError("W must be a tent or grid potential with a known compact support")
    gap = min(box[0] - x0, x1 - box[1], box[2], height - box[3])
    need = math.sqrt(2) * side
    if gap <= 0:
        raise ValueError(f"supp W touches the boundary (distance {gap})")
    if require_gap and gap <= need:
        raise ValueError(f"supp W at distance {gap} <= sqrt(d)*2^-m = {need}")
    per_cube = max(1, math.ceil(side / mesh_h - 1e-9))
    h_eff = side / per_cube
    glob = assemble(rectangle_mesh(x0, x1, 0.0, height, h_eff), dom, W, lam, "neumann")
    n_global = count_report(glob, sigma).count
    cubes = [(x0 + i * side, x0 + (i + 1) * side, j * side, (j + 1) * side)
             for i in range(nx) for j in range(ny)]

    def job(c):
        mesh = rectangle_mesh(*c, h_eff)
        nd = count_report(assemble(mesh, dom, W, lam, "dirichlet"), sigma).count
        nn = count_report(assemble(mesh, dom, W, lam, "neumann"), sigma).count
        return nd, nn

    res = parallel_map(job, cubes)
    return BracketResult(sum(r[0] for r in res), n_global, sum(r[1] for r in res), int(m_level), float(lam),
                         len(cubes), float(h_eff), float(gap), float(need))


# --- CLR diagnostic --------------------------------------------------------------

@dataclass
class ClrTable:
    rows: list
    fitted_C: float
    slope: float
    norm: float

    def as_dict(self) -> dict:
        return dict(vars(self))


def clr_bound_check(dom: HolderSubgraphDomain, V: PotentialField, es: ExponentSet | None,
                    lambda_grid: Sequence[float], mesh_h: float, quad_res: int = 4,
                    workers: int | None = None) -> ClrTable:
    """fem_count·δ₀(λV)^d along a λ-grid; a bounded product is what the CLR bound predicts."""
    es = es or compute_exponents(2, dom.gamma, dom.c)
    norm = combined_norm(V, dom, es, quad_res)
    if math.isinf(norm):
        raise ValueError("‖V‖_{p̃,β} diverges; the CLR bound does not apply (see the counterexample)")
    lams = [float(x) for x in lambda_grid]
    rows = []
    if V.is_zero:
        for lam in lams:
            rows.append({"lambda": lam, "fem_count": 0, "delta0": delta0(0.0, dom.h_omega, es.d),
                         "delta0_pow_minus_d": delta0(0.0, dom.h_omega, es.d) ** (-es.d), "product": 0.0})
        return ClrTable(rows, 0.0, 0.0, 0.0)
    scan = weyl_scan(dom, V, lams, mesh_h, "neumann", quad_res, es, workers)
    for row in scan:
        d0 = delta0(row.lam * norm, dom.h_omega, es.d)
        rows.append({"lambda": row.lam, "fem_count": row.fem_count, "delta0": d0,
                     "delta0_pow_minus_d": d0 ** (-es.d), "product": row.fem_count * d0**es.d})
    prod = np.array([r["product"] for r in rows])
    pos = prod > 0
    slope = float(theilslopes(np.log(prod[pos]), np.log(np.array(lams)[pos]))[0]) if pos.sum() >= 2 else 0.0
    return ClrTable(rows, float(prod.max()), slope, float(norm))
