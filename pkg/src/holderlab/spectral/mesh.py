"""Conforming triangulations of polygonal subgraph domains.

The chart is cut into vertical lines at every breakpoint of f (plus extra lines so
columns are no wider than ``target_h``). Neighbouring lines are joined by a zipper
triangulation, which stays conforming when two lines carry different node counts.
The base box is a tensor grid whose top strip zips onto the chart's bottom nodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..domain import BASE_BOX, HolderSubgraphDomain

VERTEX_BUDGET = 4_000_000


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3), counter-clockwise
    boundary: np.ndarray  # (n,) bool
    columns: np.ndarray  # x positions of the chart lines
    target_h: float

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def h_max(self) -> float:
        p = self.vertices[self.triangles]
        edges = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
        return float(np.sqrt((edges**2).sum(axis=1)).max())

    def stats(self) -> dict:
        return {"vertices": self.n_vertices, "triangles": self.n_triangles,
                "boundary_vertices": int(self.boundary.sum()), "target_h": self.target_h,
                "h_max": self.h_max(), "area": float(self.areas().sum())}

    def translated(self, dx: float, dy: float) -> "Mesh":
        return Mesh(self.vertices + np.array([dx, dy]), self.triangles, self.boundary,
                    self.columns + dx, self.target_h)


def _zip(lo_idx, lo_key, hi_idx, hi_key):
    """Triangulate the strip between two chains sorted by a common parameter."""
    keys = np.concatenate([lo_key[1:], hi_key[1:]])
    side = np.concatenate([np.zeros(lo_key.size - 1, dtype=np.int8), np.ones(hi_key.size - 1, dtype=np.int8)])
    order = np.lexsort((side, keys))
    from_hi = side[order].astype(bool)
    i = np.concatenate([[0], np.cumsum(~from_hi)[:-1]])
    j = np.concatenate([[0], np.cumsum(from_hi)[:-1]])
    tri = np.empty((order.size, 3), dtype=np.int64)
    lo_step = ~from_hi
    tri[lo_step] = np.stack([lo_idx[i[lo_step]], lo_idx[i[lo_step] + 1], hi_idx[j[lo_step]]], axis=1)
    tri[from_hi] = np.stack([lo_idx[i[from_hi]], hi_idx[j[from_hi] + 1], hi_idx[j[from_hi]]], axis=1)
    return tri


def _subdivide(points: np.ndarray, h: float) -> np.ndarray:
    """Insert equally spaced points so consecutive gaps are <= h."""
    out = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        k = max(1, math.ceil((b - a) / h - 1e-9))
        out.append(a + (b - a) * np.arange(1, k + 1) / k)
    res = np.concatenate(out)
    res[-1] = points[-1]
    return res


def _boundary_flags(n: int, tris: np.ndarray) -> np.ndarray:
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    flags = np.zeros(n, dtype=bool)
    flags[uniq[counts == 1].ravel()] = True
    return flags


def _finish(verts, tris, columns, target_h) -> Mesh:
    p = verts[tris]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    scale = max(1.0, float(np.abs(verts).max()))
    keep = np.abs(area) > 1e-14 * scale * scale
    tris = tris[keep]
    flip = area[keep] < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    # vertex order by (x, y) keeps the natural numbering banded
    order = np.lexsort((verts[:, 1], verts[:, 0]))
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    verts = verts[order]
    tris = rank[tris]
    return Mesh(verts, tris, _boundary_flags(verts.shape[0], tris), columns, float(target_h))


def estimate_vertices(dom: HolderSubgraphDomain, target_h: float) -> int:
    x0, x1 = dom.x_range
    cols = max(dom.xs.size, (x1 - x0) / target_h)
    n = cols * (dom.f_max() / target_h + 1)
    if dom.base:
        bx0, bx1, by0, by1 = BASE_BOX
        n += ((bx1 - bx0) / target_h + dom.xs.size) * ((by1 - by0) / target_h + 1)
    return int(n)


def triangulate(dom: HolderSubgraphDomain, target_h: float, budget: int = VERTEX_BUDGET) -> Mesh:
    if not target_h > 0:
        raise ValueError("target_h must be positive")
    est = estimate_vertices(dom, target_h)
    if est > budget:
        raise ValueError(f"mesh would need ~{est} vertices (budget {budget}); increase target_h")
    lines = _subdivide(dom.xs, target_h)
    fl = dom.f(lines)
    fl[np.isin(lines, dom.xs)] = dom.fs[np.searchsorted(dom.xs, lines[np.isin(lines, dom.xs)])]
    rows = np.where(fl > 0, np.ceil(fl / target_h - 1e-9), 0).astype(np.int64)
    verts, chains, start = [], [], 0
    for x, f, r in zip(lines, fl, rows):
        t = np.arange(r + 1) / max(r, 1) if r > 0 else np.zeros(1)
        verts.append(np.stack([np.full(t.size, x), f * t], axis=1))
        chains.append((np.arange(start, start + t.size), t))
        start += t.size
    tris = [_zip(a[0], a[1], b[0], b[1]) for a, b in zip(chains[:-1], chains[1:])
            if a[0].size > 1 or b[0].size > 1]
    if dom.base:
        bx0, bx1, by0, by1 = BASE_BOX
        x0, x1 = dom.x_range
        bxs = _subdivide(np.unique([bx0, x0, x1, bx1]), target_h)
        bys = _subdivide(np.array([by0, by1]), target_h)
        nx, ny = bxs.size, bys.size - 1  # rows strictly below the top edge
        gx, gy = np.meshgrid(bxs, bys[:-1], indexing="xy")
        grid = start + np.arange(nx * ny).reshape(ny, nx)
        verts.append(np.stack([gx.ravel(), gy.ravel()], axis=1))
        start += nx * ny
        a, b = grid[:-1, :-1].ravel(), grid[:-1, 1:].ravel()
        c, d = grid[1:, 1:].ravel(), grid[1:, :-1].ravel()
        tris += [np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)]
        # top chain at y = 0: box nodes outside the chart plus chart line feet
        outer = bxs[(bxs < x0) | (bxs > x1)]
        top_x = np.concatenate([outer, lines])
        foot = np.array([ch[0][0] for ch in chains])
        outer_idx = start + np.arange(outer.size)
        verts.append(np.stack([outer, np.zeros(outer.size)], axis=1))
        start += outer.size
        top_idx = np.concatenate([outer_idx, foot])
        o = np.argsort(top_x, kind="stable")
        tris.append(_zip(grid[-1], bxs, top_idx[o], top_x[o]))
    V = np.concatenate(verts)
    T = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=np.int64)
    return _finish(V, T, lines, target_h)


def rectangle_mesh(x0: float, x1: float, y0: float, y1: float, target_h: float) -> Mesh:
    """Structured mesh of a rectangle, identical to the restriction of a larger aligned mesh."""
    xs = _subdivide(np.array([x0, x1]), target_h)
    ys = _subdivide(np.array([y0, y1]), target_h)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    idx = np.arange(xs.size * ys.size).reshape(ys.size, xs.size)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    T = np.concatenate([np.stack([a, b, d], axis=1), np.stack([b, c, d], axis=1)])
    return _finish(np.stack([gx.ravel(), gy.ravel()], axis=1), T, xs, target_h)


def export_mesh_csv(mesh: Mesh, prefix) -> tuple[Path, Path]:
    prefix = Path(prefix)
    vpath = prefix.with_name(prefix.name + "-vertices.csv")
    tpath = prefix.with_name(prefix.name + "-triangles.csv")
    with open(vpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "boundary"])
        for (x, y), b in zip(mesh.vertices, mesh.boundary):
            w.writerow([repr(float(x)), repr(float(y)), int(b)])
    with open(tpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "k"])
        w.writerows(mesh.triangles.tolist())
    return vpath, tpath
