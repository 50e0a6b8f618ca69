"""Lᵖ norms, the boundary-weighted seminorm, the Luxemburg norm and their combination."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.stats import theilslopes

from .domain import HolderSubgraphDomain
from .exponents import ExponentSet
from .potentials import PotentialField
from .quadrature import Rule, chart_rule, domain_rule

DEFAULT_RESOLUTION = 4


def young_llogl(u):
    """Default Young function B(u) = (1+u)ln(1+u) - u."""
    u = np.asarray(u, dtype=float)
    return (1.0 + u) * np.log1p(u) - u


@dataclass(frozen=True)
class YoungFunction:
    name: str = "llogl"
    func: Callable = field(default=young_llogl, repr=False)

    def __call__(self, u):
        return self.func(u)


DEFAULT_YOUNG = YoungFunction()


def _abs_values(V: PotentialField, dom: HolderSubgraphDomain, rule: Rule) -> np.ndarray:
    vals = V.evaluate(dom, rule.x, rule.y, h=np.where(np.isnan(rule.h), -1.0, rule.h))
    return np.abs(vals)


def _integrable(V: PotentialField, exponent: float) -> bool:
    return V.h_power is None or exponent > -1.0


def lp_norm(V: PotentialField, dom: HolderSubgraphDomain, p: float,
            resolution: int = DEFAULT_RESOLUTION) -> float:
    """(∫_Ω |V|^p)^{1/p}; returns inf for a non-integrable boundary singularity."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if V.is_zero:
        return 0.0
    s = p * V.singular_exponent
    if not _integrable(V, s):
        return math.inf
    rule = domain_rule(dom, resolution, s)
    return float(np.sum(rule.w * _abs_values(V, dom, rule) ** p)) ** (1.0 / p)


def _seminorm_integral(V, dom, p, beta, eta, resolution) -> float:
    s = p * V.singular_exponent - beta
    if eta <= 0 and not _integrable(V, s) and V.h_power is not None:
        return math.inf
    if eta <= 0 and V.h_power is None and s <= -1:
        # bounded V: diverges unless V vanishes next to the graph
        probe = chart_rule(dom, resolution, 0.0)
        near = probe.h < 2.0 ** (-2 * resolution - 8) * np.maximum(dom.f(probe.x), 1e-300)
        if np.any(_abs_values(V, dom, probe)[near] > 0):
            return math.inf
        s = 0.0
    rule = chart_rule(dom, resolution, s if eta <= 0 else 0.0, eta)
    vals = _abs_values(V, dom, rule)
    return float(np.sum(rule.w * rule.h ** (-beta) * vals**p))


def weighted_seminorm(V: PotentialField, dom: HolderSubgraphDomain, p: float, beta: float,
                      cutoff_eta: float = 0.0, resolution: int = DEFAULT_RESOLUTION) -> float:
    """(∫_{chart, h ≥ η} h^{-β}|V|^p)^{1/p}; inf flags divergence at η = 0."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if cutoff_eta < 0:
        raise ValueError("cutoff_eta must be >= 0")
    if V.is_zero:
        return 0.0
    val = _seminorm_integral(V, dom, p, beta, cutoff_eta, resolution)
    return val ** (1.0 / p) if math.isfinite(val) else math.inf


def orlicz_norm(V: PotentialField, dom: HolderSubgraphDomain, young: YoungFunction = DEFAULT_YOUNG,
                resolution: int = DEFAULT_RESOLUTION, rule: Rule | None = None) -> float:
    """Luxemburg norm inf{t > 0 : ∫ B(|V|/t) ≤ 1}."""
    if V.is_zero:
        return 0.0
    if V.h_power is not None and V.singular_exponent <= -1:
        return math.inf
    if rule is None:
        rule = domain_rule(dom, resolution, V.singular_exponent)
    vals = _abs_values(V, dom, rule)
    return luxemburg_root(vals, rule.w, young)


def luxemburg_root(vals: np.ndarray, weights: np.ndarray, young: YoungFunction = DEFAULT_YOUNG) -> float:
    mask = (vals > 0) & (weights > 0)
    if not mask.any():
        return 0.0
    v, w = vals[mask], weights[mask]

    def excess(t):
        return float(np.sum(w * young(v / t))) - 1.0

    hi = float(v.max())
    while excess(hi) > 0:
        hi *= 2.0
    lo = hi / 2.0
    while excess(lo) <= 0:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    return brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def combined_norm(V: PotentialField, dom: HolderSubgraphDomain, es: ExponentSet,
                  resolution: int = DEFAULT_RESOLUTION, young: YoungFunction = DEFAULT_YOUNG) -> float:
    """‖V‖_{p̃,β}: Orlicz (d = 2) or L^{d/2} norm plus the weighted seminorm."""
    if V.is_zero:
        return 0.0
    base = orlicz_norm(V, dom, young, resolution) if es.d == 2 else lp_norm(V, dom, es.d / 2, resolution)
    semi = weighted_seminorm(V, dom, es.ptilde, es.beta, 0.0, resolution)
    return base + semi


def _orlicz_lp_constant(p: float, area: float) -> float:
    """C with ‖V‖_B ≤ C‖V‖_p for the default Young function."""
    if p >= 2:
        # B(u) ≤ u²/2 and Jensen
        return math.sqrt(area ** (1.0 - 2.0 / p) / 2.0)
    u = np.exp(np.linspace(-40, 40, 20001))
    kp = float(np.max(young_llogl(u) / u**p))
    return kp ** (1.0 / p)


def norm_comparison(V: PotentialField, dom: HolderSubgraphDomain, p: float, es: ExponentSet,
                    resolution: int = DEFAULT_RESOLUTION) -> dict:
    """Compare ‖V‖_{p̃,β} with ‖V‖_p for p above p̃/(1-β).

    The bound is explicit: Hölder's inequality gives the seminorm part with
    constant (∫ h^{-βr'})^{1/(r'p̃)}, r' = p/(p-p̃).
    """
    if es.beta >= 1:
        raise ValueError(f"norm comparison needs beta < 1, got {es.beta}")
    threshold = es.ptilde / (1.0 - es.beta)
    if p <= threshold:
        raise ValueError(f"need p > p̃/(1-β) = {threshold}")
    lhs = combined_norm(V, dom, es, resolution)
    rhs = lp_norm(V, dom, p, resolution)
    rprime = p / (p - es.ptilde)
    from .potentials import constant_potential
    weight_int = weighted_seminorm(constant_potential(-1.0), dom, 1.0, es.beta * rprime, 0.0, resolution)
    c_semi = weight_int ** (1.0 / (rprime * es.ptilde))
    c_base = _orlicz_lp_constant(p, dom.area()) if es.d == 2 else dom.area() ** (2.0 / es.d - 1.0 / p)
    bound = (c_semi + c_base) * rhs
    return {"lhs": lhs, "rhs": rhs, "threshold": threshold, "constant": c_semi + c_base,
            "ratio": lhs / rhs if rhs > 0 else 0.0, "holds": bool(lhs <= bound * (1 + 1e-9))}


@dataclass
class DivergenceReport:
    etas: list
    integrals: list
    slope: float
    rate_exponent: float
    analytic_exponent: float | None
    diverges: bool
    method: str

    def as_dict(self) -> dict:
        return dict(vars(self))


def divergence_slope(V: PotentialField, dom: HolderSubgraphDomain, p: float, beta: float,
                     eta_grid=None, resolution: int = DEFAULT_RESOLUTION,
                     rate_threshold: float = -0.05) -> DivergenceReport:
    """Truncated integrals I(η) = ∫_{h ≥ η} h^{-β}|V|^p on a decreasing η-grid.

    ``slope`` is the log-log slope of I against 1/η. ``rate_exponent`` is the
    log-log slope of dI/dln(1/η); it is negative exactly when the integrals
    settle, and ≥ 0 for logarithmic or power divergence.
    """
    if eta_grid is None:
        eta_grid = 2.0 ** -np.arange(4, 16)
    etas = np.asarray(eta_grid, dtype=float)
    if etas.size < 3 or np.any(np.diff(etas) >= 0) or np.any(etas <= 0):
        raise ValueError("eta_grid must hold >= 3 strictly decreasing positive values")
    vals = np.array([_seminorm_integral(V, dom, p, beta, e, resolution) for e in etas])
    L = np.log(1.0 / etas)
    pos = vals > 0
    slope = float(theilslopes(np.log(vals[pos]), L[pos])[0]) if pos.sum() >= 2 else 0.0
    rate = np.diff(vals) / np.diff(L)
    Lm = 0.5 * (L[1:] + L[:-1])
    okr = rate > 0
    if okr.sum() >= 2:
        rate_exp = float(theilslopes(np.log(rate[okr]), Lm[okr])[0])
    else:
        rate_exp = -math.inf
    analytic = None
    if V.h_power is not None and not V.is_zero:
        analytic = p * V.h_power[1] - beta
        diverges, method = analytic <= -1.0, "analytic"
    else:
        diverges, method = rate_exp >= rate_threshold, "numeric"
    return DivergenceReport(etas.tolist(), vals.tolist(), slope, rate_exp, analytic, bool(diverges), method)
