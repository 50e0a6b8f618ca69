"""Non-positive potentials V on a subgraph domain."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .domain import BASE_BOX, HolderSubgraphDomain


@dataclass(frozen=True, eq=False)
class PotentialField:
    """V ≤ 0 given in closed form or sampled on a grid.

    ``h_power = (coef, alpha)`` marks potentials of the form coef·h^alpha on the
    chart (0 on the base box); quadrature uses alpha to grade toward the graph.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    support: str = "omega"
    h_power: tuple[float, float] | None = None

    def evaluate(self, dom: HolderSubgraphDomain, x, y, h=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        kind = self.kind
        if kind == "zero":
            return np.zeros(np.broadcast(x, y).shape)
        if kind == "constant":
            out = np.full(np.broadcast(x, y).shape, float(self.params["value"]))
            if self.support == "chart":
                out = np.where(y >= 0, out, 0.0)
            return out
        if kind == "h_power":
            coef, alpha = self.h_power
            if h is None:
                h = dom.height(x, y)
            h = np.asarray(h, dtype=float)
            chart = (y >= 0) & (h > 0)
            safe = np.where(chart, h, 1.0)
            return np.where(chart, coef * safe**alpha, 0.0)
        if kind == "tent":
            cx, cy = self.params["center"]
            r = float(self.params["halfwidth"])
            depth = float(self.params["depth"])
            dist = np.maximum(np.abs(x - cx), np.abs(y - cy))
            return -depth * np.maximum(0.0, 1.0 - dist / r)
        if kind == "grid":
            x0, x1, y0, y1 = self.params["box"]
            vals = np.asarray(self.params["values"], dtype=float)
            ny, nx = vals.shape
            ix = np.floor((x - x0) / (x1 - x0) * nx).astype(int)
            iy = np.floor((y - y0) / (y1 - y0) * ny).astype(int)
            inside = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
            return np.where(inside, vals[np.clip(iy, 0, ny - 1), np.clip(ix, 0, nx - 1)], 0.0)
        raise ValueError(f"unknown potential kind {kind!r}")

    def sup_abs(self, dom: HolderSubgraphDomain | None = None) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(float(self.params["value"]))
        if self.kind == "tent":
            return float(self.params["depth"])
        if self.kind == "grid":
            return float(np.abs(np.asarray(self.params["values"], dtype=float)).max())
        coef, alpha = self.h_power
        if alpha < 0:
            return np.inf
        top = dom.f_max() if dom is not None else 1.0
        return abs(coef) * top**alpha

    @property
    def singular_exponent(self) -> float:
        """Exponent of the boundary power law (0 for bounded potentials)."""
        if self.h_power is None:
            return 0.0
        return min(0.0, float(self.h_power[1]))

    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "constant":
            return float(self.params["value"]) == 0.0
        if self.kind == "tent":
            return float(self.params["depth"]) == 0.0
        if self.kind == "h_power":
            return self.h_power[0] == 0.0
        return not np.any(np.asarray(self.params["values"]))

    def scaled(self, factor: float) -> "PotentialField":
        if factor < 0:
            raise ValueError("scaling factor must be non-negative")
        p = dict(self.params)
        if self.kind == "constant":
            p["value"] = factor * float(p["value"])
        elif self.kind == "tent":
            p["depth"] = factor * float(p["depth"])
        elif self.kind == "grid":
            p["values"] = (factor * np.asarray(p["values"], dtype=float)).tolist()
        hp = None
        if self.h_power is not None:
            hp = (factor * self.h_power[0], self.h_power[1])
            p["coef"] = hp[0]
        return PotentialField(self.kind, p, self.support, hp)

    def describe(self) -> dict:
        out = {"kind": self.kind, "support": self.support}
        out.update({k: v for k, v in self.params.items() if k != "values"})
        return out


def zero_potential() -> PotentialField:
    return PotentialField("zero")


def constant_potential(value: float, support: str = "omega") -> PotentialField:
    if value > 0:
        raise ValueError("potential must be non-positive")
    return PotentialField("constant", {"value": float(value)}, support)


def h_power_potential(coef: float, exponent: float) -> PotentialField:
    """coef·h^exponent on the subgraph chart, 0 on the base box."""
    if coef > 0:
        raise ValueError("potential must be non-positive")
    return PotentialField("h_power", {"coef": float(coef), "exponent": float(exponent)},
                          "chart", (float(coef), float(exponent)))


def tent_potential(center=(0.5, 0.5), halfwidth: float = 0.25, depth: float = 1.0) -> PotentialField:
    if depth < 0 or halfwidth <= 0:
        raise ValueError("tent needs depth >= 0 and halfwidth > 0")
    return PotentialField("tent", {"center": [float(center[0]), float(center[1])],
                                   "halfwidth": float(halfwidth), "depth": float(depth)})


def tent_support(V: PotentialField) -> tuple[float, float, float, float]:
    cx, cy = V.params["center"]
    r = float(V.params["halfwidth"])
    return cx - r, cx + r, cy - r, cy + r


def build_potential(spec: Mapping[str, Any] | None) -> PotentialField:
    """Potential from a JSON spec, e.g. {"kind": "constant", "value": -1}."""
    if spec is None:
        return zero_potential()
    spec = dict(spec)
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return zero_potential()
    if kind == "constant":
        return constant_potential(float(spec["value"]), spec.get("support", "omega"))
    if kind == "h_power":
        return h_power_potential(float(spec["coef"]), float(spec["exponent"]))
    if kind == "tent":
        return tent_potential(spec.get("center", (0.5, 0.5)), float(spec.get("halfwidth", 0.25)),
                              float(spec.get("depth", 1.0)))
    if kind == "grid":
        vals = np.asarray(spec["values"], dtype=float)
        if np.any(vals > 0):
            raise ValueError("potential must be non-positive")
        return PotentialField("grid", {"box": list(spec.get("box", BASE_BOX)), "values": vals.tolist()})
    if kind == "example":
        from .counterexample import example_potential
        return example_potential(float(spec["epsilon"]), int(spec.get("d", 2)))
    raise ValueError(f"unknown potential kind {kind!r}")
