"""Column-wise graded quadrature on subgraph domains.

Chart nodes are tensor products of Gauss-Legendre points in x' (per column
between breakpoints) and a geometric grading (ratio 2) in h = f(x') - x_d.
The innermost h-cell uses Gauss-Jacobi when the integrand behaves like h^s.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .domain import BASE_BOX, HolderSubgraphDomain

GAUSS_ORDER = 4


@lru_cache(maxsize=64)
def gauss_legendre01(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


@lru_cache(maxsize=256)
def gauss_jacobi01(n: int, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights with ∫_0^1 u^s g(u) du ≈ Σ w g(u)."""
    t, w = roots_jacobi(n, 0.0, s)
    return 0.5 * (t + 1.0), w * 0.5 ** (s + 1.0)


@dataclass(frozen=True)
class Rule:
    x: np.ndarray
    y: np.ndarray
    h: np.ndarray  # NaN on the base box
    w: np.ndarray

    def __add__(self, other: "Rule") -> "Rule":
        return Rule(*(np.concatenate([a, b]) for a, b in
                      ((self.x, other.x), (self.y, other.y), (self.h, other.h), (self.w, other.w))))

    @property
    def size(self) -> int:
        return int(self.w.size)


def h_template(resolution: int, singular: float = 0.0, order: int = GAUSS_ORDER):
    """Relative nodes t in (0,1) and weights for ∫_0^1 F(t) dt, F ~ t^singular at 0."""
    levels = 2 * resolution + 12
    uniform = np.linspace(0.0, 1.0, 2**resolution + 1)
    geometric = 2.0 ** -np.arange(levels + 1)
    pts = np.unique(np.concatenate([uniform[1:], geometric]))
    inner = pts[0]
    g, gw = gauss_legendre01(order)
    a, b = pts[:-1], pts[1:]
    t = (a[:, None] + (b - a)[:, None] * g[None, :]).ravel()
    w = ((b - a)[:, None] * gw[None, :]).ravel()
    if singular != 0.0:
        u, uw = gauss_jacobi01(order + 2, float(singular))
        ti = inner * u
        wi = inner * uw * u ** (-singular)
    else:
        ti, wi = inner * g, inner * gw
    return np.concatenate([ti, t]), np.concatenate([wi, w])


def column_nodes(dom: HolderSubgraphDomain, resolution: int, order: int = GAUSS_ORDER):
    """Gauss-Legendre nodes in x' per column, with columns split to width ≤ 2^-r·span."""
    xs = dom.xs
    x0, x1 = dom.x_range
    target = (x1 - x0) * 2.0 ** (-resolution)
    widths = np.diff(xs)
    splits = np.maximum(1, np.ceil(widths / target - 1e-12)).astype(np.int64)
    starts = np.repeat(xs[:-1], splits)
    idx = np.arange(splits.sum()) - np.repeat(np.cumsum(splits) - splits, splits)
    sub = np.repeat(widths / splits, splits)
    lo = starts + idx * sub
    g, gw = gauss_legendre01(order)
    xn = (lo[:, None] + sub[:, None] * g[None, :]).ravel()
    wn = (sub[:, None] * gw[None, :]).ravel()
    return xn, wn


def chart_rule(dom: HolderSubgraphDomain, resolution: int = 4, singular: float = 0.0,
               eta: float = 0.0) -> Rule:
    """Quadrature over {x' in chart, max(eta,0) < h < f(x')}."""
    xn, wn = column_nodes(dom, resolution)
    H = dom.f(xn)
    keep = H > eta
    xn, wn, H = xn[keep], wn[keep], H[keep]
    if eta <= 0:
        t, tw = h_template(resolution, singular)
        h = (H[:, None] * t[None, :]).ravel()
        w = ((wn * H)[:, None] * tw[None, :]).ravel()
        xx = np.repeat(xn, t.size)
    else:
        g, gw = gauss_legendre01(GAUSS_ORDER)
        levels = int(np.ceil(np.log2(H.max() / eta))) + 1
        lo = eta * 2.0 ** np.arange(levels)
        a = np.minimum(lo[None, :], H[:, None])
        b = np.minimum(2 * lo[None, :], H[:, None])
        width = b - a
        h = (a[:, :, None] + width[:, :, None] * g[None, None, :]).reshape(len(H), -1)
        w = (width[:, :, None] * gw[None, None, :] * wn[:, None, None]).reshape(len(H), -1)
        xx = np.repeat(xn, h.shape[1])
        h, w = h.ravel(), w.ravel()
        nz = w > 0
        xx, h, w = xx[nz], h[nz], w[nz]
    y = dom.f(xx) - h
    return Rule(xx, y, h, w)


def box_rule(box, resolution: int = 4, order: int = GAUSS_ORDER) -> Rule:
    x0, x1, y0, y1 = box
    n = 2 ** max(resolution - 1, 0)
    nx = max(1, int(round(n * (x1 - x0))))
    ny = max(1, int(round(n * (y1 - y0))))
    g, gw = gauss_legendre01(order)
    ex = np.linspace(x0, x1, nx + 1)
    ey = np.linspace(y0, y1, ny + 1)
    px = (ex[:-1, None] + np.diff(ex)[:, None] * g).ravel()
    wx = (np.diff(ex)[:, None] * gw).ravel()
    py = (ey[:-1, None] + np.diff(ey)[:, None] * g).ravel()
    wy = (np.diff(ey)[:, None] * gw).ravel()
    X, Y = np.meshgrid(px, py, indexing="ij")
    W = np.outer(wx, wy)
    return Rule(X.ravel(), Y.ravel(), np.full(X.size, np.nan), W.ravel())


def domain_rule(dom: HolderSubgraphDomain, resolution: int = 4, singular: float = 0.0) -> Rule:
    rule = chart_rule(dom, resolution, singular)
    if dom.base:
        rule = rule + box_rule(BASE_BOX, resolution)
    return rule


def rectangle_rule(dom: HolderSubgraphDomain, rect, resolution: int = 3, singular: float = 0.0) -> Rule:
    """Quadrature over rect ∩ Ω for an axis-parallel rectangle (x0, x1, y0, y1).

    The chart part is integrated column-wise up to min(y1, f); breakpoints of f
    inside the rectangle split the x'-integration so the cap is exact.
    """
    x0, x1, y0, y1 = rect
    parts = []
    cx0, cx1 = dom.x_range
    lo, hi = max(x0, cx0), min(x1, cx1)
    if hi > lo and y1 > 0:
        cuts = np.concatenate([[lo], dom.breakpoints_in(lo, hi), [hi]])
        cuts = np.unique(cuts)
        nsub = 2 ** max(resolution - 2, 0)
        fine = (cuts[:-1, None] + np.diff(cuts)[:, None] * np.linspace(0, 1, nsub + 1)[None, :-1]).ravel()
        edges = np.append(fine, hi)
        g, gw = gauss_legendre01(GAUSS_ORDER)
        xn = (edges[:-1, None] + np.diff(edges)[:, None] * g).ravel()
        wn = (np.diff(edges)[:, None] * gw).ravel()
        F = dom.f(xn)
        top = np.minimum(F, y1)
        bot = max(y0, 0.0)
        ok = top > bot
        xn, wn, F, top = xn[ok], wn[ok], F[ok], top[ok]
        if xn.size:
            # h runs from F - top (≥ 0) up to F - bot
            hlo = F - top
            hhi = F - bot
            capped = hlo <= 0
            t, tw = h_template(max(resolution - 2, 0), singular if capped.any() else 0.0)
            gl, glw = gauss_legendre01(GAUSS_ORDER)
            # capped columns: graded toward the graph; others: plain Gauss on [hlo, hhi]
            hc = (hhi[capped][:, None] * t[None, :]).ravel()
            wc = ((wn[capped] * hhi[capped])[:, None] * tw[None, :]).ravel()
            xc = np.repeat(xn[capped], t.size)
            nu = 2 ** max(resolution - 2, 0)
            sub = np.linspace(0, 1, nu + 1)
            a = hlo[~capped][:, None] + (hhi - hlo)[~capped][:, None] * sub[None, :-1]
            wid = ((hhi - hlo)[~capped] / nu)[:, None]
            hu = (a[:, :, None] + wid[:, :, None] * gl[None, None, :]).reshape(a.shape[0], nu * gl.size)
            wu = (np.broadcast_to(wid[:, :, None] * glw[None, None, :], (a.shape[0], nu, gl.size))
                  * wn[~capped][:, None, None]).reshape(a.shape[0], nu * gl.size)
            xu = np.repeat(xn[~capped], hu.shape[1])
            xx = np.concatenate([xc, xu])
            hh = np.concatenate([hc, hu.ravel()])
            ww = np.concatenate([wc, wu.ravel()])
            parts.append(Rule(xx, dom.f(xx) - hh, hh, ww))
    if dom.base:
        bx0, bx1, by0, by1 = BASE_BOX
        bb = (max(x0, bx0), min(x1, bx1), max(y0, by0), min(y1, by1))
        if bb[1] > bb[0] and bb[3] > bb[2]:
            r = box_rule((0.0, 1.0, 0.0, 1.0), 1)
            sx, sy = bb[1] - bb[0], bb[3] - bb[2]
            parts.append(Rule(bb[0] + sx * r.x, bb[2] + sy * r.y, r.h, r.w * sx * sy))
    if not parts:
        return Rule(np.empty(0), np.empty(0), np.empty(0), np.empty(0))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out
