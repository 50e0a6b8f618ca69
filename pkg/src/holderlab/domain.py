"""Subgraph domains {0 < x_d < f(x')} in d = 2, optionally glued onto a base box.

The fractal boundary is the truncated lacunary tent series
f_n = sum_{j<=n} 2^{-γjm} g_j with g_j(x') = ψ(2^{jm}x' - k) and the tent
ψ(t) = 1/2 - |t - 1/2| on the unit cell. Truncation makes every domain an exact
polygon, so meshing and quadrature downstream are breakpoint-exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

BASE_BOX = (-2.0, 2.0, -2.0, 0.0)  # x0, x1, y0, y1
BREAKPOINT_BUDGET = 1 << 22


class ChartMissError(ValueError):
    """Point does not lie in the subgraph chart."""


@dataclass(frozen=True)
class FractalParams:
    gamma: float
    m: int
    n_max: int
    d: int = 2
    strict: bool = True

    def __post_init__(self):
        if self.d != 2:
            raise ValueError("fractal numerics are implemented for d = 2 only")
        lo = (self.d - 1) / self.d
        if not (lo < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in ({lo}, 1), got {self.gamma}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max}")
        if self.strict:
            if self.m * self.gamma < 1:
                raise ValueError(f"need m*gamma >= 1, got {self.m * self.gamma}")
            if self.m * (1 - self.gamma) < 4 - 1e-12:
                raise ValueError(f"need m*(1-gamma) >= 4, got {self.m * (1 - self.gamma)}")

    def weight(self, j: int) -> float:
        return 2.0 ** (-self.gamma * j * self.m)

    def tail_bound(self) -> float:
        """Upper bound for f - f_{n_max}."""
        q = 2.0 ** (-self.gamma * self.m)
        return 0.5 * self.weight(self.n_max + 1) / (1.0 - q)

    def breakpoint_count(self, level: int | None = None) -> int:
        level = self.n_max if level is None else level
        return (1 << (level * self.m + 1)) + 1


def _tent_frac(t):
    frac = t - np.floor(t)
    return 0.5 - np.abs(frac - 0.5)


def fractal_value(p: FractalParams, x, level: int | None = None):
    """f_level(x) for x in [0, 1] (closed interval, vectorised)."""
    level = p.n_max if level is None else level
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for j in range(level + 1):
        out = out + p.weight(j) * _tent_frac(np.ldexp(x, j * p.m))
    return out


def eval_fractal_boundary(p: FractalParams, xprime, level: int | str = "full"):
    """Evaluate f_level at points of the open unit interval; level -1 gives 0."""
    x = np.asarray(xprime, dtype=float)
    if np.any((x <= 0) | (x >= 1)) or np.any(~np.isfinite(x)):
        raise ValueError("x' must lie in the open interval (0, 1)")
    lvl = p.n_max if level == "full" else int(level)
    if lvl < -1:
        raise ValueError(f"level must be >= -1, got {level}")
    val = fractal_value(p, x, lvl) if lvl >= 0 else np.zeros_like(x)
    return float(val) if val.ndim == 0 else val


def spike_base(p: FractalParams, n: int, k):
    """a_{n,k}: supremum of f_{n-1} over the closed cell Q(n,k).

    f_{n-1} has no breakpoint strictly inside a level-n cell, so the supremum is
    attained at a cell endpoint.
    """
    k = np.asarray(k, dtype=np.int64)
    if n < 0:
        raise ValueError("n must be >= 0")
    if np.any(k < 0) or np.any(k >= (1 << (n * p.m))):
        raise ValueError("k outside the level-n index set")
    if n == 0:
        out = np.zeros(k.shape)
    else:
        left = np.ldexp(k.astype(float), -n * p.m)
        right = np.ldexp((k + 1).astype(float), -n * p.m)
        out = np.maximum(fractal_value(p, left, n - 1), fractal_value(p, right, n - 1))
    return float(out) if out.ndim == 0 else out


def cell_oscillation(p: FractalParams, n: int, k):
    """max - min of f_{n-1} over Q(n,k) (linear on the cell)."""
    k = np.asarray(k, dtype=np.int64)
    if n == 0:
        return np.zeros(k.shape)
    left = np.ldexp(k.astype(float), -n * p.m)
    right = np.ldexp((k + 1).astype(float), -n * p.m)
    return np.abs(fractal_value(p, right, n - 1) - fractal_value(p, left, n - 1))


def fractal_breakpoints(p: FractalParams, level: int | None = None) -> np.ndarray:
    level = p.n_max if level is None else level
    count = p.breakpoint_count(level)
    if count > BREAKPOINT_BUDGET:
        raise MemoryError(f"{count} breakpoints exceed the budget {BREAKPOINT_BUDGET}")
    return np.ldexp(np.arange(count, dtype=float), -(level * p.m + 1))


def spike_window_scan(p: FractalParams, n: int) -> dict:
    """Exact check of the spike window at level n for f = f_{n_max}.

    f - a_{n,k} is piecewise linear on each cell, so extrema over the cell and
    over the middle window are attained at breakpoints of f or window ends.
    """
    if n > p.n_max:
        raise ValueError("n must not exceed n_max")
    xb = fractal_breakpoints(p)
    cells = 1 << (n * p.m)
    width = 2.0 ** (-n * p.m)
    w = p.weight(n)
    k_all = np.arange(cells)
    a = spike_base(p, n, k_all)
    fb = fractal_value(p, xb)
    # breakpoints on cell boundaries belong to both neighbouring cells
    kb = np.minimum(np.floor(np.ldexp(xb, n * p.m)).astype(np.int64), cells - 1)
    upper = fb - a[kb]
    edge = (np.ldexp(xb, n * p.m) == kb) & (kb > 0)
    upper_prev = fb[edge] - a[kb[edge] - 1]
    max_upper = max(upper.max(), upper_prev.max() if upper_prev.size else -np.inf)
    t = np.ldexp(xb, n * p.m) - kb
    inside = (t >= 0.25) & (t <= 0.75)
    lo_pts = np.ldexp(k_all + 0.25, -n * p.m)
    hi_pts = np.ldexp(k_all + 0.75, -n * p.m)
    win_min = np.minimum(fractal_value(p, lo_pts) - a, fractal_value(p, hi_pts) - a)
    if inside.any():
        inner = np.full(cells, np.inf)
        np.minimum.at(inner, kb[inside], upper[inside])
        win_min = np.minimum(win_min, inner)
    lower_bound = w / 8.0
    return {
        "n": n,
        "cells": cells,
        "cell_width": width,
        "lower_bound": lower_bound,
        "upper_bound": w,
        "min_window_excess": float(win_min.min()),
        "max_cell_excess": float(max_upper),
        "lower_violations": int(np.sum(win_min < lower_bound)),
        "upper_violations": int(np.sum(upper > w)) + int(np.sum(upper_prev > w)),
    }


def _max_holder_ratio_pairs(fx, fy, x, y, gamma):
    dist = np.abs(x - y)
    ok = dist > 0
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(fx[ok] - fy[ok]) / dist[ok] ** gamma))


@dataclass(frozen=True, eq=False)
class HolderSubgraphDomain:
    """Polygonal subgraph domain over the chart interval [xs[0], xs[-1]]."""

    xs: np.ndarray
    fs: np.ndarray
    base: bool
    gamma: float
    c: float
    h_omega: float
    kind: str
    fractal: FractalParams | None = None
    spec: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.xs.ndim != 1 or self.xs.shape != self.fs.shape or self.xs.size < 2:
            raise ValueError("breakpoints must be matching 1-d arrays with >= 2 entries")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(self.fs < 0):
            raise ValueError("boundary function must be non-negative")
        if self.base and (self.xs[0] < BASE_BOX[0] or self.xs[-1] > BASE_BOX[1]):
            raise ValueError("chart interval must lie inside the base box")
        if self.h_omega <= 0:
            raise ValueError("h_omega must be positive")

    @property
    def d(self) -> int:
        return 2

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def f(self, x):
        """Boundary function, exact at breakpoints (linear interpolation)."""
        return np.interp(x, self.xs, self.fs)

    def f_max(self) -> float:
        return float(self.fs.max())

    def chart_area(self) -> float:
        return float(np.sum(0.5 * (self.fs[1:] + self.fs[:-1]) * np.diff(self.xs)))

    def area(self) -> float:
        base = (BASE_BOX[1] - BASE_BOX[0]) * (BASE_BOX[3] - BASE_BOX[2]) if self.base else 0.0
        return base + self.chart_area()

    def boundary_polygon(self) -> np.ndarray:
        """Counter-clockwise outer boundary (consecutive duplicates removed)."""
        gx, gy = self.xs[::-1], self.fs[::-1]
        x0, x1 = self.x_range
        if self.base:
            bx0, bx1, by0, by1 = BASE_BOX
            pts = [(bx0, by0), (bx1, by0), (bx1, by1), (x1, 0.0)]
            pts += list(zip(gx, gy))
            pts += [(x0, 0.0), (bx0, by1)]
        else:
            pts = [(x0, 0.0), (x1, 0.0)] + list(zip(gx, gy))
        arr = np.array(pts, dtype=float)
        keep = np.ones(len(arr), dtype=bool)
        keep[1:] = np.any(np.diff(arr, axis=0) != 0, axis=1)
        arr = arr[keep]
        if np.all(arr[0] == arr[-1]):
            arr = arr[:-1]
        return arr

    def shoelace_area(self) -> float:
        p = self.boundary_polygon()
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, x, y):
        """Open-set membership for arrays of points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x0, x1 = self.x_range
        in_chart = (x > x0) & (x < x1) & (y >= 0) & (y < self.f(np.clip(x, x0, x1)))
        if self.base:
            bx0, bx1, by0, by1 = BASE_BOX
            in_base = (x > bx0) & (x < bx1) & (y > by0) & (y < by1)
            return in_chart | in_base
        return in_chart & (y > 0)

    def in_chart(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x0, x1 = self.x_range
        return (x > x0) & (x < x1) & (y >= 0) & (y < self.f(np.clip(x, x0, x1)))

    def height(self, x, y):
        """h = f(x') - x_d without membership checks (vectorised)."""
        return self.f(x) - np.asarray(y, dtype=float)

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        i0, i1 = np.searchsorted(self.xs, [lo, hi], side="right")
        return self.xs[i0:i1]

    def sup_f(self, lo: float, hi: float) -> float:
        """Supremum of f over the open interval (lo, hi) intersected with the chart."""
        x0, x1 = self.x_range
        lo, hi = max(lo, x0), min(hi, x1)
        if hi <= lo:
            return -math.inf
        i0 = np.searchsorted(self.xs, lo, side="right")
        i1 = np.searchsorted(self.xs, hi, side="left")
        vals = [self.f(lo), self.f(hi)]
        if i1 > i0:
            vals.append(self.fs[i0:i1].max())
        return float(max(vals))

    def inf_f(self, lo: float, hi: float) -> float:
        x0, x1 = self.x_range
        lo, hi = max(lo, x0), min(hi, x1)
        if hi <= lo:
            return math.inf
        i0 = np.searchsorted(self.xs, lo, side="right")
        i1 = np.searchsorted(self.xs, hi, side="left")
        vals = [self.f(lo), self.f(hi)]
        if i1 > i0:
            vals.append(self.fs[i0:i1].min())
        return float(min(vals))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "base": self.base,
            "gamma": self.gamma,
            "c": self.c,
            "h_omega": self.h_omega,
            "breakpoints": int(self.xs.size),
            "x_range": list(self.x_range),
            "area": self.area(),
        }


def h_at(dom: HolderSubgraphDomain, x) -> float:
    """Local height h_x = f(x') - x_d of a point in the subgraph chart."""
    xp, xd = float(x[0]), float(x[1])
    x0, x1 = dom.x_range
    if not (x0 <= xp <= x1) or xd < 0:
        raise ChartMissError(f"point {tuple(x)} is outside the subgraph chart")
    h = float(dom.f(xp)) - xd
    if h <= 0:
        raise ChartMissError(f"point {tuple(x)} lies on or above the graph")
    return h


def empirical_holder_constant(xs, fs, gamma: float) -> float:
    """Largest |f(x)-f(y)|/|x-y|^γ over all pairs of breakpoints."""
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.size > 4000:
        raise ValueError("too many breakpoints for the pairwise Hölder estimate")
    dx = np.abs(xs[:, None] - xs[None, :])
    df = np.abs(fs[:, None] - fs[None, :])
    mask = dx > 0
    return float((df[mask] / dx[mask] ** gamma).max()) if mask.any() else 0.0


def holder_check(obj, num_pairs: int = 100_000, rng_seed: int = 0) -> float:
    """Empirical max of |f(x)-f(y)|/|x-y|^γ over random pairs at all scales.

    Offsets are log-uniform between the finest breakpoint spacing and 1 so that
    every level of the series is probed.
    """
    rng = np.random.default_rng(rng_seed)
    if isinstance(obj, FractalParams):
        p = obj
        gamma = p.gamma
        func = lambda t: fractal_value(p, t)  # noqa: E731
        x0, x1 = 0.0, 1.0
        finest = 2.0 ** (-(p.n_max + 1) * p.m - 1)
    else:
        dom = obj
        gamma = dom.gamma
        func = dom.f
        x0, x1 = dom.x_range
        finest = max(float(np.min(np.diff(dom.xs))) / 4, 1e-15)
        if np.all(dom.fs == dom.fs[0]):
            return 0.0
    span = x1 - x0
    x = x0 + span * rng.random(num_pairs)
    r = span * np.exp(rng.uniform(np.log(finest / span), 0.0, num_pairs))
    y = x + np.where(rng.random(num_pairs) < 0.5, -r, r)
    y = np.clip(y, x0, x1)
    return _max_holder_ratio_pairs(func(x), func(y), x, y, gamma)


def _middle_min(xs, fs, window) -> float:
    lo, hi = window
    x0, x1 = xs[0], xs[-1]
    a, b = x0 + lo * (x1 - x0), x0 + hi * (x1 - x0)
    sel = (xs >= a) & (xs <= b)
    vals = [np.interp(a, xs, fs), np.interp(b, xs, fs)]
    if sel.any():
        vals.append(fs[sel].min())
    return float(min(vals))


def build_domain(spec: Mapping[str, Any] | FractalParams) -> HolderSubgraphDomain:
    """Build a domain from a JSON-style spec.

    Accepted shapes::

        {"fractal": {"gamma": .., "m": .., "n_max": .., "strict": true}, "base": true}
        {"flat": height, "width": 1.0}
        {"samples": [[x, f], ...]}

    Optional keys: ``base``, ``gamma``, ``c``, ``h_omega``, ``h_omega_window``.
    """
    if isinstance(spec, FractalParams):
        spec = {"fractal": {"gamma": spec.gamma, "m": spec.m, "n_max": spec.n_max, "strict": spec.strict}}
    spec = dict(spec)
    window = tuple(spec.get("h_omega_window", (0.25, 0.75)))
    kinds = [k for k in ("fractal", "flat", "samples") if k in spec]
    if len(kinds) != 1:
        raise ValueError("domain spec needs exactly one of 'fractal', 'flat', 'samples'")
    kind = kinds[0]
    fractal = None
    if kind == "fractal":
        fp = spec["fractal"]
        fractal = fp if isinstance(fp, FractalParams) else FractalParams(
            gamma=float(fp["gamma"]), m=int(fp["m"]), n_max=int(fp["n_max"]),
            strict=bool(fp.get("strict", True)))
        xs = fractal_breakpoints(fractal)
        fs = fractal_value(fractal, xs)
        base = bool(spec.get("base", True))
        gamma = float(spec.get("gamma", fractal.gamma))
        c = float(spec.get("c", 3.0))
    elif kind == "flat":
        height = float(spec["flat"])
        width = float(spec.get("width", 1.0))
        if height <= 0 or width <= 0:
            raise ValueError("flat domain needs positive height and width")
        xs = np.array([0.0, width])
        fs = np.array([height, height])
        base = bool(spec.get("base", False))
        gamma = float(spec.get("gamma", 1.0))
        c = float(spec.get("c", 0.0))
    else:
        pts = np.asarray(spec["samples"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("samples must be a list of [x, f] pairs")
        xs, fs = pts[:, 0].copy(), pts[:, 1].copy()
        base = bool(spec.get("base", False))
        gamma = float(spec.get("gamma", 1.0))
        c = float(spec["c"]) if "c" in spec else empirical_holder_constant(xs, fs, gamma)
    if "h_omega" in spec:
        h_omega = float(spec["h_omega"])
    else:
        h_omega = 0.25 * _middle_min(xs, fs, window)
    echo = {k: (v if not isinstance(v, FractalParams) else vars(v)) for k, v in spec.items()}
    return HolderSubgraphDomain(xs=xs, fs=fs, base=base, gamma=gamma, c=c,
                                h_omega=h_omega, kind=kind, fractal=fractal, spec=echo)


def export_breakpoints_csv(dom: HolderSubgraphDomain, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "f"])
        for x, y in zip(dom.xs, dom.fs):
            w.writerow([repr(float(x)), repr(float(y))])
