"""Oscillatory domains, the δ-selection rule and the greedy Besicovitch-type cover.

Every domain is stored as an axis-parallel rectangle intersected with Ω. Points of
the subgraph chart whose ∞-ball of radius δ₀/2 reaches above the graph form the
boundary layer; everything else (including the base box) is covered by cubes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import BASE_BOX, ChartMissError, HolderSubgraphDomain
from .exponents import ExponentSet, compute_exponents
from .kernels import greedy_order, mark_covered
from .norms import DEFAULT_YOUNG, YoungFunction, _abs_values, luxemburg_root
from .potentials import PotentialField
from .quadrature import rectangle_rule

KINDS = ("cuboid-a-eq-delta", "cuboid-a-eq-c0h", "graph-capped", "interior-cube")
CLASS_OF_KIND = {"cuboid-a-eq-c0h": "A1", "graph-capped": "A2", "cuboid-a-eq-delta": "A3",
                 "interior-cube": "interior"}
CLASSES = ("A1", "A2", "A3", "interior")
REFINE_ROUNDS = 8


class BracketError(RuntimeError):
    """A δ bisection whose end points do not bracket the threshold."""

    def __init__(self, message: str, values: dict):
        super().__init__(f"{message}: {values}")
        self.values = values


@dataclass(frozen=True)
class CoverConfig:
    theta: float = 1.0  # Orlicz threshold standing in for "‖V‖_B ∼ 1"
    kappa: float = 1.0  # constant in the case-3 balance ‖V‖^p̃ ∼ max(h/(c1δ),1)^{(d−1)/γ}
    quad_res: int = 3
    probe_factor: float = 2.0  # probe spacing = (smallest a or δ) / probe_factor
    bisect_rtol: float = 1e-3
    min_delta_ratio: float = 2.0**-40
    guard_factor: float = 64.0
    young: YoungFunction = DEFAULT_YOUNG


DEFAULT_CONFIG = CoverConfig()


@dataclass(frozen=True)
class OscillatoryDomain:
    center: tuple[float, float]
    delta: float
    a: float
    kind: str
    case_tag: str
    h_center: float

    @property
    def rect(self) -> tuple[float, float, float, float]:
        x, y = self.center
        return (x - 0.5 * self.a, x + 0.5 * self.a, y - 0.5 * self.delta, y + 0.5 * self.delta)

    @property
    def klass(self) -> str:
        return CLASS_OF_KIND[self.kind]

    @property
    def aspect(self) -> float:
        """M = δ/a."""
        return self.delta / self.a

    def as_dict(self) -> dict:
        return {"center": list(self.center), "delta": self.delta, "a": self.a, "kind": self.kind,
                "case": self.case_tag, "h": None if math.isnan(self.h_center) else self.h_center}


# --- geometry ----------------------------------------------------------------

def throttled_width(h: float, delta: float, es: ExponentSet) -> float:
    """a = min(δ, c0·max(h, c1δ)^{1/γ})."""
    return min(delta, es.c0 * max(h, es.c1 * delta) ** (1.0 / es.gamma))


def classify_kind(h: float, delta: float, es: ExponentSet) -> str:
    if es.c0 * max(h, es.c1 * delta) ** (1.0 / es.gamma) >= delta:
        return "cuboid-a-eq-delta"
    if h >= es.c1 * delta:
        return "cuboid-a-eq-c0h"
    return "graph-capped"


def domain_exponents(dom: HolderSubgraphDomain) -> ExponentSet:
    return compute_exponents(2, dom.gamma, dom.c)


def make_oscillatory_domain(dom: HolderSubgraphDomain, x, delta: float, es: ExponentSet,
                            case_tag: str = "case1") -> OscillatoryDomain:
    xp, xd = float(x[0]), float(x[1])
    x0, x1 = dom.x_range
    if not (x0 < xp < x1) or xd < 0 or xd >= float(dom.f(xp)):
        raise ChartMissError(f"centre {(xp, xd)} is not in the subgraph chart")
    if not delta > 0:
        raise ValueError("delta must be positive")
    h = float(dom.f(xp)) - xd
    return OscillatoryDomain((xp, xd), float(delta), throttled_width(h, delta, es),
                             classify_kind(h, delta, es), case_tag, h)


def interior_cube(x, delta: float, h: float = math.nan) -> OscillatoryDomain:
    return OscillatoryDomain((float(x[0]), float(x[1])), float(delta), float(delta),
                             "interior-cube", "interior", h)


def open_rect_meets_domain(dom: HolderSubgraphDomain, rect) -> bool:
    """Exact test: does the open rectangle intersect Ω?"""
    xl, xr, yl, yu = rect
    if not (xr > xl and yu > yl):
        return False
    if dom.base:
        bx0, bx1, by0, by1 = BASE_BOX
        if xl < bx1 and xr > bx0 and yl < by1 and yu > by0:
            return True
    lo = max(yl, 0.0)
    if yu <= lo:
        return False
    return dom.sup_f(xl, xr) > lo


def domains_intersect(dom: HolderSubgraphDomain, r1, r2) -> bool:
    inter = (max(r1[0], r2[0]), min(r1[1], r2[1]), max(r1[2], r2[2]), min(r1[3], r2[3]))
    return open_rect_meets_domain(dom, inter)


class _RangeMin:
    """Sparse-table minimum of f over breakpoint index ranges (vectorised queries)."""

    def __init__(self, dom: HolderSubgraphDomain):
        self.dom = dom
        table = [dom.fs.copy()]
        k = 1
        while 2 * k <= dom.fs.size:
            prev = table[-1]
            table.append(np.minimum(prev[:-k], prev[k:]))
            k *= 2
        self.table = table

    def inf_f(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """min of f over [lo, hi] clipped to the chart interval."""
        dom = self.dom
        x0, x1 = dom.x_range
        lo = np.clip(lo, x0, x1)
        hi = np.clip(hi, x0, x1)
        out = np.minimum(dom.f(lo), dom.f(hi))
        i0 = np.searchsorted(dom.xs, lo, side="right")
        i1 = np.searchsorted(dom.xs, hi, side="left")
        has = i1 > i0
        if has.any():
            a, b = i0[has], i1[has]
            lev = np.floor(np.log2(b - a)).astype(int)
            vals = np.empty(a.size)
            for L in np.unique(lev):
                sel = lev == L
                t = self.table[L]
                vals[sel] = np.minimum(t[a[sel]], t[b[sel] - (1 << L)])
            out[has] = np.minimum(out[has], vals)
        return out


def boundary_layer_mask(dom: HolderSubgraphDomain, x, y, delta0: float, rmq: _RangeMin | None = None):
    """Chart points whose ∞-ball of radius δ₀/2 reaches the graph."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    chart = dom.in_chart(x, y)
    out = np.zeros(x.shape, dtype=bool)
    if chart.any():
        rmq = rmq or _RangeMin(dom)
        low = rmq.inf_f(x[chart] - 0.5 * delta0, x[chart] + 0.5 * delta0)
        out[chart] = low < y[chart] + 0.5 * delta0
    return out


# --- norms on a single domain ---------------------------------------------------

def _rule(dom, V, rect, cfg):
    return rectangle_rule(dom, rect, cfg.quad_res, V.singular_exponent)


def orlicz_on(dom: HolderSubgraphDomain, V: PotentialField, rect, cfg: CoverConfig = DEFAULT_CONFIG) -> float:
    if V.is_zero:
        return 0.0
    if V.h_power is not None and V.singular_exponent <= -1:
        return math.inf
    r = _rule(dom, V, rect, cfg)
    return luxemburg_root(_abs_values(V, dom, r), r.w, cfg.young) if r.size else 0.0


def lp_power_on(dom: HolderSubgraphDomain, V: PotentialField, rect, p: float,
                cfg: CoverConfig = DEFAULT_CONFIG) -> float:
    """∫_{rect ∩ Ω} |V|^p."""
    if V.is_zero:
        return 0.0
    if V.h_power is not None and p * V.singular_exponent <= -1:
        return math.inf
    r = rectangle_rule(dom, rect, cfg.quad_res, p * V.singular_exponent)
    return float(np.sum(r.w * _abs_values(V, dom, r) ** p)) if r.size else 0.0


def _rect_at(x, a, delta):
    return (x[0] - 0.5 * a, x[0] + 0.5 * a, x[1] - 0.5 * delta, x[1] + 0.5 * delta)


def case3_balance(dom, V, x, h, delta, es, cfg=DEFAULT_CONFIG) -> float:
    """‖V‖^p̃_{p̃,D(δ)} / max(h/(c1δ), 1)^{(d−1)/γ}; nondecreasing in δ."""
    a = throttled_width(h, delta, es)
    lhs = lp_power_on(dom, V, _rect_at(x, a, delta), es.ptilde, cfg)
    return lhs / max(h / (es.c1 * delta), 1.0) ** ((es.d - 1) / es.gamma)


def _bisect_log(fun, target, lo, hi, rtol, what):
    """Largest δ in [lo, hi] with fun(δ) ≤ target, fun nondecreasing."""
    f_lo, f_hi = fun(lo), fun(hi)
    if f_lo > target:
        raise BracketError(f"{what}: threshold exceeded at the lower end", {"lo": lo, "f_lo": f_lo, "target": target})
    if f_hi <= target:
        return hi
    while hi / lo > 1 + rtol:
        mid = math.sqrt(lo * hi)
        if fun(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def select_delta(dom: HolderSubgraphDomain, V: PotentialField, x, delta0: float, es: ExponentSet,
                 cfg: CoverConfig = DEFAULT_CONFIG, layer: bool | None = None) -> tuple[float, str]:
    """δ and the branch (interior, case1, case2, case3) that selected it."""
    x = (float(x[0]), float(x[1]))
    if layer is None:
        layer = bool(boundary_layer_mask(dom, [x[0]], [x[1]], delta0)[0])
    if V.is_zero:
        return delta0, ("case1" if layer else "interior")
    lo = delta0 * cfg.min_delta_ratio
    if not layer:
        def g(d):
            return orlicz_on(dom, V, _rect_at(x, d, d), cfg)
        return _bisect_log(g, cfg.theta, lo, delta0, cfg.bisect_rtol, "interior cube"), "interior"
    h = float(dom.f(x[0])) - x[1]

    def orl(d):
        return orlicz_on(dom, V, _rect_at(x, throttled_width(h, d, es), d), cfg)

    if es.c0 * max(h, es.c1 * delta0) ** (1.0 / es.gamma) > delta0:
        if orl(delta0) <= cfg.theta:
            return delta0, "case1"
        return _bisect_log(orl, cfg.theta, lo, delta0, cfg.bisect_rtol, "case 2"), "case2"

    def bal(d):
        return case3_balance(dom, V, x, h, d, es, cfg)

    if bal(delta0) <= cfg.kappa:
        return delta0, "case1"
    delta_c = es.c0 * h ** (1.0 / es.gamma)
    if bal(delta_c) <= cfg.kappa:
        return _bisect_log(bal, cfg.kappa, delta_c, delta0, cfg.bisect_rtol, "case 3"), "case3"
    if orl(delta_c) <= cfg.theta:
        return delta_c, "case3"
    return _bisect_log(orl, cfg.theta, min(lo, delta_c / 2), delta_c, cfg.bisect_rtol, "case 2"), "case2"


# --- probe grid ------------------------------------------------------------------

@dataclass
class ProbeGrid:
    x: np.ndarray
    y: np.ndarray
    col_x: np.ndarray
    col_start: np.ndarray
    spacing: tuple[float, float, float]  # chart x, base x, y

    @property
    def size(self) -> int:
        return int(self.x.size)

    @classmethod
    def from_points(cls, x, y, spacing=(math.nan,) * 3) -> "ProbeGrid":
        order = np.lexsort((y, x))
        x, y = np.asarray(x, dtype=float)[order], np.asarray(y, dtype=float)[order]
        col_x, col_start = np.unique(x, return_index=True)
        return cls(x, y, col_x, np.append(col_start, x.size).astype(np.int64), spacing)


def _centres(lo, hi, step):
    n = max(1, math.ceil((hi - lo) / step - 1e-9))
    s = (hi - lo) / n
    return lo + s * (np.arange(n) + 0.5)


def probe_grid(dom: HolderSubgraphDomain, delta0: float, es: ExponentSet,
               factor: float = 2.0, region: str = "full", max_points: int = 5_000_000,
               interior: str = "coarse", delta_min: float | None = None) -> ProbeGrid:
    """Cell-centred probes.

    Boundary-layer probes use x-spacing a_min/factor; interior probes (base box and,
    with ``interior="coarse"``, the non-layer part of the chart) use δ_min/factor on a
    lattice anchored at the chart's left end. ``interior="fine"`` keeps the fine
    chart lattice for every chart point. δ_min (default δ₀) is the smallest δ the
    cover will use; the layer test always uses δ₀.
    """
    dm = float(delta0 if delta_min is None else min(delta_min, delta0))
    a_min = min(dm, es.c2 * dm ** (1.0 / es.gamma))
    sx, sb, sy = a_min / factor, dm / factor, dm / factor
    x0, x1 = dom.x_range
    cx = _centres(x0, x1, sx)
    fx = dom.f(cx)
    ys_top = _centres(0.0, dom.f_max(), sy)
    est = cx.size * ys_top.size + (16.0 / sb**2 if dom.base else 0)
    if est > 4 * max_points:
        raise ValueError(f"probe grid too large (~{int(est)} points); raise delta0 or lower the factor")
    X, Y = np.meshgrid(cx, ys_top, indexing="ij")
    keep = Y < fx[:, None]
    px, py = X[keep], Y[keep]
    rmq = _RangeMin(dom)
    layer = boundary_layer_mask(dom, px, py, delta0, rmq)
    if interior == "coarse":
        px, py, layer = px[layer], py[layer], layer[layer]
        n_coarse = max(1, math.ceil((x1 - x0) / sb - 1e-9))
        ccx = x0 + sb * (np.arange(n_coarse) + 0.5)
        CX, CY = np.meshgrid(ccx, ys_top, indexing="ij")
        ok = CY < dom.f(CX)
        qx, qy = CX[ok], CY[ok]
        inner = ~boundary_layer_mask(dom, qx, qy, delta0, rmq)
        px, py = np.concatenate([px, qx[inner]]), np.concatenate([py, qy[inner]])
        layer = np.concatenate([layer, np.zeros(int(inner.sum()), dtype=bool)])
    elif interior != "fine":
        raise ValueError(f"interior must be 'coarse' or 'fine', got {interior!r}")
    if dom.base:
        bx0, bx1, by0, by1 = BASE_BOX
        BX, BY = np.meshgrid(_centres(bx0, bx1, sb), _centres(by0, by1, sy), indexing="ij")
        px, py = np.concatenate([px, BX.ravel()]), np.concatenate([py, BY.ravel()])
        layer = np.concatenate([layer, np.zeros(BX.size, dtype=bool)])
    if region != "full":
        sel = layer if region == "boundary" else ~layer
        px, py = px[sel], py[sel]
    if px.size > max_points:
        raise ValueError(f"probe grid has {px.size} points (limit {max_points})")
    return ProbeGrid.from_points(px, py, (sx, sb, sy))


# --- greedy cover -----------------------------------------------------------------

@dataclass
class CoverFamilies:
    families: list  # list of (class, [OscillatoryDomain, ...])
    K_used: int
    delta0: float
    region: str
    emission: dict = field(default_factory=dict)  # class -> list of domains in emission order
    probe: ProbeGrid | None = None
    stats: dict = field(default_factory=dict)

    @property
    def domains(self) -> list:
        return [d for _, fam in self.families for d in fam]

    @property
    def size(self) -> int:
        return sum(len(f) for _, f in self.families)

    def class_K(self) -> dict:
        out = {c: 0 for c in CLASSES}
        for c, _ in self.families:
            out[c] += 1
        return out

    def as_dict(self) -> dict:
        return {"K_used": self.K_used, "delta0": self.delta0, "region": self.region,
                "class_K": self.class_K(), "J": self.size, "stats": self.stats,
                "families": [{"class": c, "domains": [d.as_dict() for d in fam]} for c, fam in self.families]}


class _FamilyIndex:
    """Rectangles of one family bucketed by x for fast intersection queries."""

    def __init__(self, bucket: float):
        self.bucket = bucket
        self.cells: dict[int, list] = {}

    def _keys(self, r):
        return range(int(math.floor(r[0] / self.bucket)), int(math.floor(r[1] / self.bucket)) + 1)

    def hits(self, dom, r) -> bool:
        for k in self._keys(r):
            for q in self.cells.get(k, ()):
                if domains_intersect(dom, r, q):
                    return True
        return False

    def add(self, r):
        for k in self._keys(r):
            self.cells.setdefault(k, []).append(r)


def assign_families(dom: HolderSubgraphDomain, domains: Sequence[OscillatoryDomain], bucket: float) -> list:
    """Put each domain (in order) into the first family it does not intersect."""
    fams: list[list] = []
    idx: list[_FamilyIndex] = []
    for od in domains:
        r = od.rect
        for k, fi in enumerate(idx):
            if not fi.hits(dom, r):
                fams[k].append(od)
                fi.add(r)
                break
        else:
            fi = _FamilyIndex(bucket)
            fi.add(r)
            idx.append(fi)
            fams.append([od])
    return fams


def probe_assignments(dom: HolderSubgraphDomain, V: PotentialField, delta0: float, es: ExponentSet,
                      probe: ProbeGrid, cfg: CoverConfig = DEFAULT_CONFIG):
    """Per probe point: δ, a, class, case tag and h (NaN off the chart)."""
    n = probe.size
    layer = boundary_layer_mask(dom, probe.x, probe.y, delta0)
    chart = dom.in_chart(probe.x, probe.y)
    h = np.where(chart, dom.f(probe.x) - probe.y, np.nan)
    delta = np.full(n, float(delta0))
    case = np.where(layer, "case1", "interior").astype(object)
    if not V.is_zero:
        for i in range(n):
            delta[i], case[i] = select_delta(dom, V, (probe.x[i], probe.y[i]), delta0, es, cfg, bool(layer[i]))
    a = delta.copy()
    klass = np.full(n, "interior", dtype=object)
    li = np.flatnonzero(layer)
    hl, dl = h[li], delta[li]
    wide = es.c0 * np.maximum(hl, es.c1 * dl) ** (1.0 / es.gamma)
    a[li] = np.minimum(dl, wide)
    k = np.where(wide >= dl, "A3", np.where(hl >= es.c1 * dl, "A1", "A2"))
    klass[li] = k
    return delta, a, klass, case, h


def greedy_cover(dom: HolderSubgraphDomain, V: PotentialField, delta0: float, es: ExponentSet | None = None,
                 cfg: CoverConfig = DEFAULT_CONFIG, probe: ProbeGrid | None = None,
                 region: str = "full", use_numba: bool | None = None) -> CoverFamilies:
    """Greedy cover of the probe grid, class by class (A1, A2, A3, interior).

    Each step takes the uncovered probe point of largest δ (ties: lexicographically
    first), emits its domain and marks the probe points in its closed rectangle.
    """
    es = es or domain_exponents(dom)
    if not delta0 > 0:
        raise ValueError("delta0 must be positive")
    if probe is None:
        # refine until the probe spacing resolves the smallest selected δ
        dmin = float(delta0)
        for _ in range(REFINE_ROUNDS):
            probe = probe_grid(dom, delta0, es, cfg.probe_factor, region, delta_min=dmin)
            delta, a, klass, case, h = probe_assignments(dom, V, delta0, es, probe, cfg)
            if delta.size == 0 or delta.min() >= dmin * (1 - 1e-12):
                break
            dmin = float(delta.min())
        else:
            raise RuntimeError(f"probe grid did not settle after {REFINE_ROUNDS} refinements (δ_min = {dmin})")
    else:
        delta, a, klass, case, h = probe_assignments(dom, V, delta0, es, probe, cfg)
    guard = int(cfg.guard_factor * max(1.0, dom.area()) * delta0 ** (-es.d)) + 1
    families, emission, stats = [], {}, {"probe_points": probe.size, "guard": guard}
    for c in CLASSES:
        sel = klass == c
        if not sel.any():
            continue
        vals = np.where(sel, delta, -np.inf)
        order, done = greedy_order(probe.col_x, probe.col_start, probe.x, probe.y, vals,
                                   0.5 * a, 0.5 * delta, guard, use_numba)
        if not done:
            raise RuntimeError(f"greedy cover exceeded {guard} domains in class {c} "
                               f"(probe points {int(sel.sum())}, emitted {order.size})")
        kind = {"A1": "cuboid-a-eq-c0h", "A2": "graph-capped", "A3": "cuboid-a-eq-delta",
                "interior": "interior-cube"}[c]
        ods = [OscillatoryDomain((float(probe.x[i]), float(probe.y[i])), float(delta[i]), float(a[i]),
                                 kind, str(case[i]), float(h[i])) for i in order]
        emission[c] = ods
        for fam in assign_families(dom, ods, bucket=max(delta0, 1e-12)):
            families.append((c, fam))
        stats[f"J_{c}"] = len(ods)
    return CoverFamilies(families, len(families), float(delta0), region, emission, probe, stats)


# --- verification and diagnostics --------------------------------------------------

@dataclass
class CoverReport:
    pairwise_disjoint: bool
    coverage_fraction: float
    K_used: int
    J_sizes: dict
    overlaps: list

    def as_dict(self) -> dict:
        return dict(vars(self))


def family_overlaps(dom: HolderSubgraphDomain, fam: Sequence[OscillatoryDomain], limit: int = 10) -> list:
    """Pairs of intersecting domains (sweep over x-sorted rectangles, exact Ω test)."""
    rects = np.array([d.rect for d in fam]).reshape(-1, 4)
    order = np.argsort(rects[:, 0], kind="stable")
    r = rects[order]
    out = []
    for i in range(len(r)):
        j_end = np.searchsorted(r[:, 0], r[i, 1], side="left")
        for j in range(i + 1, j_end):
            if r[j, 2] < r[i, 3] and r[i, 2] < r[j, 3] and domains_intersect(dom, r[i], r[j]):
                out.append((int(order[i]), int(order[j])))
                if len(out) >= limit:
                    return out
    return out


def verify_cover(cf: CoverFamilies, dom: HolderSubgraphDomain, probe: ProbeGrid | None = None,
                 use_numba: bool | None = None) -> CoverReport:
    overlaps = []
    for k, (_, fam) in enumerate(cf.families):
        for i, j in family_overlaps(dom, fam):
            overlaps.append({"family": k, "pair": [i, j]})
    probe = probe or cf.probe
    rects = np.array([d.rect for d in cf.domains]).reshape(-1, 4)
    covered = mark_covered(probe.col_x, probe.col_start, probe.y, rects, use_numba)
    J = {"case1": 0, "case2": 0, "case3": 0, "interior": 0}
    for d in cf.domains:
        J[d.case_tag] += 1
    J["total"] = cf.size
    return CoverReport(not overlaps, float(covered.mean()) if covered.size else 1.0, cf.K_used, J, overlaps)


def count_vs_bound(cf: CoverFamilies, delta0: float, d: int = 2) -> float:
    """|J|·δ₀^d."""
    return cf.size * delta0**d


def _chart_span(dom, od):
    xl, xr, yl, yu = od.rect
    return max(yl, 0.0), yu, dom.inf_f(xl, xr), dom.sup_f(xl, xr)


def local_geometry_checks(od: OscillatoryDomain, dom: HolderSubgraphDomain, es: ExponentSet | None = None,
                          V: PotentialField | None = None, cfg: CoverConfig = DEFAULT_CONFIG) -> dict:
    """Exact breakpoint checks of the structural properties of one oscillatory domain."""
    es = es or domain_exponents(dom)
    xl, xr, yl, yu = od.rect
    x0, x1 = dom.x_range
    lo_y, hi_y, inf_f, sup_f = _chart_span(dom, od)
    report = {"kind": od.kind, "violations": []}
    a_expected = od.delta if od.kind == "interior-cube" else throttled_width(od.h_center, od.delta, es)
    report["a_formula"] = abs(od.a - a_expected) <= 1e-12 * max(1.0, od.a)
    if not report["a_formula"]:
        report["violations"].append({"item": "a_formula", "a": od.a, "expected": a_expected})
    if od.kind in ("cuboid-a-eq-delta", "cuboid-a-eq-c0h"):
        inside_chart = x0 <= xl and xr <= x1 and yu <= inf_f
        below = yl >= 0 or (dom.base and BASE_BOX[2] <= yl)
        ok = bool(inside_chart and below)
        report["full_rectangle"] = ok
        if not ok:
            report["violations"].append({"item": "full_rectangle", "inf_f": inf_f, "top": yu})
    if od.kind != "interior-cube":
        report["graph_margin"] = inf_f - (od.center[1] - 0.25 * od.delta)
        if report["graph_margin"] < 0:
            report["violations"].append({"item": "graph_margin", "witness_f": inf_f})
        h = od.h_center
        h_hi = sup_f - lo_y
        h_lo = max(0.0, inf_f - hi_y)
        report["h_range"] = (h_lo, h_hi)
        if od.kind == "cuboid-a-eq-c0h":
            ok = 0.5 * h <= h_lo and h_hi <= 2 * h
            report["h_ratio_ok"] = ok
            if not ok:
                report["violations"].append({"item": "h_ratio", "h": h, "range": (h_lo, h_hi)})
        if od.kind == "graph-capped":
            dev = max(h_hi - h, h - h_lo)
            report["h_deviation"] = dev
            if dev > od.delta * (1 + 1e-12):
                report["violations"].append({"item": "h_deviation", "h": h, "range": (h_lo, h_hi)})
        if V is not None and not V.is_zero:
            report["seminorm_constant"] = seminorm_lower_constant(od, dom, V, es, cfg)
    report["ok"] = not report["violations"]
    return report


def seminorm_lower_constant(od, dom, V, es, cfg=DEFAULT_CONFIG) -> float:
    """|V|^p̃_{p̃,β,D} / (max(h, c1δ)^{−β} ‖V‖^p̃_{p̃,D})."""
    rect = od.rect
    r = rectangle_rule(dom, rect, cfg.quad_res, es.ptilde * V.singular_exponent - es.beta)
    chart = ~np.isnan(r.h) & (r.h > 0)
    vals = _abs_values(V, dom, r) ** es.ptilde
    semi = float(np.sum(r.w[chart] * r.h[chart] ** (-es.beta) * vals[chart]))
    plain = float(np.sum(r.w[chart] * vals[chart]))
    if plain == 0:
        return math.inf
    return semi / (max(od.h_center, es.c1 * od.delta) ** (-es.beta) * plain)


def posterior_conditions(od: OscillatoryDomain, dom, V, es, cfg=DEFAULT_CONFIG) -> dict:
    """Re-evaluate the norm condition that justified a case-2 or case-3 domain."""
    x, h = od.center, od.h_center
    if od.case_tag == "case2":
        return {"case": "case2", "value": orlicz_on(dom, V, od.rect, cfg), "threshold": cfg.theta}
    if od.case_tag == "case3":
        return {"case": "case3", "value": case3_balance(dom, V, x, h, od.delta, es, cfg), "threshold": cfg.kappa}
    return {"case": od.case_tag}


def averaged_potential_lower_bound(cf: CoverFamilies, dom: HolderSubgraphDomain, V: PotentialField,
                                   K_used: int | None = None, quad_res: int = 3) -> float:
    """(1/(2K)) Σ_k Σ_{D∈F_k} (1/|D|) ∫_D |4KV|; −Δ + V is bounded below by minus this."""
    K = int(K_used if K_used is not None else cf.K_used)
    if V.is_zero or K == 0:
        return 0.0
    cfg = CoverConfig(quad_res=quad_res)
    total = 0.0
    for d in cf.domains:
        r = rectangle_rule(dom, d.rect, quad_res, V.singular_exponent)
        area = float(r.w.sum())
        if area <= 0:
            continue
        integral = lp_power_on(dom, V, d.rect, 1.0, cfg)
        if not math.isfinite(integral):
            return math.inf
        total += 4 * K * integral / area
    return total / (2 * K)
