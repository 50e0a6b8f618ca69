"""Certificate that N(−Δ + λV) outgrows λ^{d/2} on the lacunary fractal domain.

The test functions u_{n,k} = sin(ω(x_d − a_{n,k})), ω = 2^{γmn}, live above the
level-(n−1) graph on the cell Q(n,k). With H(x') = f(x') − a_{n,k} the three
integrals reduce to x'-integrals of functions of H alone:

    ∫|u|²   = ∫ S(H),            S(H) = ∫_0^H sin²(ωs) ds
    ∫|∇u|²  = ∫ ω²(H − S(H))
    ∫V|u|²  = −b_V ∫ H^{e+1} G(ωH),   G(z) = ∫_0^1 t^e sin²(z(1−t)) dt

where e = (2/d)(−1+ε). Expanding sin² in powers turns each term into a sum of
∫ H^q dx' over linear pieces of H, which is integrated in closed form. Since
H ≤ 2^{−γmn}, ωH ≤ 1 and twenty terms are far below round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import beta as beta_fn

from .domain import FractalParams, build_domain, cell_oscillation, fractal_value, spike_base
from .exponents import compute_exponents
from .potentials import h_power_potential

SERIES_TERMS = 20
DIRECT_BUDGET = 10_000


def example_constants(d: int = 2) -> tuple[float, float, float]:
    """(b₂, b_∇, b_V) from the closed forms of the sin² and cos² integrals."""
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    b2 = 2.0 ** (-(d - 1)) * (1.0 / 16.0 - math.sin(0.25) / 4.0)
    bnabla = 0.5 + math.sin(2.0) / 4.0
    return b2, bnabla, 2.0 * bnabla / b2


def epsilon_max(d: int, gamma: float) -> float:
    return (d - 1) * (1.0 / gamma - 1.0)


def potential_exponent(epsilon: float, d: int = 2) -> float:
    return (2.0 / d) * (-1.0 + epsilon)


def example_potential(epsilon: float, d: int = 2):
    """V = −b_V·h^{(2/d)(−1+ε)} on the chart, 0 on the base box."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return h_power_potential(-example_constants(d)[2], potential_exponent(epsilon, d))


def cubic_margin(mu, d: int):
    """f(μ) = μ²(μ−(d+1))/d² − μ((1/d)μ² − d)/(d+1); the seminorm diverges iff f(μ) ≤ −1."""
    mu = np.asarray(mu, dtype=float)
    return mu**2 * (mu - (d + 1)) / d**2 - mu / (d + 1) * (mu**2 / d - d)


def epsilon_admissible(d: int, gamma: float, grid: int = 10_000) -> dict:
    """Admissible ε-interval, the L^{p*} threshold and the μ-grid check of the cubic."""
    lo_gamma = (d - 1) / d
    if not (lo_gamma < gamma < 1):
        raise ValueError(f"gamma must lie in ({lo_gamma}, 1)")
    es = compute_exponents(d, gamma)
    e_max = epsilon_max(d, gamma)
    # p*(2/d)(−1+ε) > −1  <=>  ε > 1 − d/(2p*)
    eps_lp = max(0.0, 1.0 - d / (2.0 * es.pstar))
    mu = es.mu
    check_at_max = es.pstar * potential_exponent(e_max, d) > -1.0
    mus = np.linspace(d, d + 1, grid + 1)
    fvals = cubic_margin(mus, d)
    upper = min(1.0, e_max)
    return {
        "interval": (0.0, e_max),
        "lp_ok_threshold": eps_lp,
        "eps_check_at_max": bool(check_at_max),
        "mu_relation": mu * (mu - (d + 1)) + d,
        "default_epsilon": 0.5 * (max(eps_lp, 0.0) + upper),
        "f_at_d": float(cubic_margin(d, d)),
        "f_max_on_grid": float(fvals.max()),
        "f_argmax": float(mus[np.argmax(fvals)]),
        "f_decreasing": bool(np.all(np.diff(fvals) < 0)),
        "f_at_mu": float(cubic_margin(mu, d)),
        "cubic_ok": bool(fvals.max() <= -1.0 + 1e-12 and abs(cubic_margin(d, d) + 1.0) < 1e-12),
    }


@dataclass(frozen=True)
class ExampleConfig:
    gamma: float = 0.6
    m: int = 10
    n_max: int = 2
    epsilon: float | None = None
    d: int = 2
    strict: bool = True

    def __post_init__(self):
        if self.d != 2:
            raise ValueError("the certificate is implemented for d = 2")
        FractalParams(self.gamma, self.m, self.n_max, self.d, self.strict)
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", epsilon_admissible(self.d, self.gamma)["default_epsilon"])
        e_max = epsilon_max(self.d, self.gamma)
        if not (0 < self.epsilon <= e_max):
            raise ValueError(f"epsilon must lie in (0, {e_max}], got {self.epsilon}")

    @property
    def fractal(self) -> FractalParams:
        return FractalParams(self.gamma, self.m, self.n_max, self.d, self.strict)

    @property
    def constants(self) -> tuple[float, float, float]:
        return example_constants(self.d)

    @property
    def exponent(self) -> float:
        return potential_exponent(self.epsilon, self.d)


def build_example(cfg: ExampleConfig):
    dom = build_domain({"fractal": {"gamma": cfg.gamma, "m": cfg.m, "n_max": cfg.n_max,
                                    "strict": cfg.strict}, "base": True})
    return dom, example_potential(cfg.epsilon, cfg.d)


def lambda_log2(cfg: ExampleConfig, n: int) -> float:
    if n < 0:
        raise ValueError("n must be >= 0")
    g = cfg.gamma * cfg.m * n
    return 2.0 * g + g * cfg.exponent


def lambda_schedule(cfg: ExampleConfig, n: int) -> float:
    """λ(n) = 2^{2γmn}·2^{γmn(2/d)(−1+ε)}."""
    return 2.0 ** lambda_log2(cfg, n)


def ratio_log2(cfg: ExampleConfig, n: int) -> float:
    """log₂ of λ(n)^{−d/2}·2^{(d−1)mn}."""
    return (cfg.d - 1) * cfg.m * n - 0.5 * cfg.d * lambda_log2(cfg, n)


def ratio_growth_log2(cfg: ExampleConfig) -> float:
    """m[(d−1) − γ(d−1+ε)]."""
    return cfg.m * ((cfg.d - 1) - cfg.gamma * (cfg.d - 1 + cfg.epsilon))


# --- exact form integrals -----------------------------------------------------

def _power_integral(h0, h1, length, q):
    """∫ H^q over pieces where H is linear from h0 to h1 (both ≥ 0)."""
    h0 = np.asarray(h0, dtype=float)
    h1 = np.asarray(h1, dtype=float)
    diff = h1 - h0
    scale = np.maximum(np.maximum(h0, h1), 1e-300)
    flat = np.abs(diff) <= 1e-9 * scale
    safe = np.where(flat, 1.0, diff)
    exact = (h1 ** (q + 1) - h0 ** (q + 1)) / ((q + 1) * safe)
    # midpoint expansion for nearly flat pieces
    mid = 0.5 * (h0 + h1)
    approx = mid**q * (1.0 + q * (q - 1) * (diff / np.where(mid > 0, mid, 1.0)) ** 2 / 24.0)
    return length * np.where(flat, approx, exact)


def _series_coefficients(omega: float, exponent: float, terms: int = SERIES_TERMS):
    """Coefficients of S(H) = Σ s_j H^{2j+1} and H^{e+1}G(ωH) = Σ g_j H^{e+1+2j}."""
    j = np.arange(1, terms + 1)
    fact = np.array([math.factorial(2 * int(i)) for i in j], dtype=float)
    sign = (-1.0) ** (j + 1)
    base = sign * 2.0 ** (2 * j - 1) * omega ** (2 * j) / fact
    s_coef = base / (2 * j + 1)
    g_coef = base * beta_fn(exponent + 1.0, 2 * j + 1.0)
    return j, s_coef, g_coef


def _positive_pieces(x0, x1, h0, h1):
    """Clip linear pieces to where H > 0."""
    keep = (h0 > 0) | (h1 > 0)
    x0, x1, h0, h1 = x0[keep], x1[keep], h0[keep], h1[keep]
    cross = (h0 < 0) | (h1 < 0)
    if cross.any():
        t = h0[cross] / (h0[cross] - h1[cross])
        xr = x0[cross] + t * (x1[cross] - x0[cross])
        left_neg = h0[cross] < 0
        nx0, nx1 = x0[cross].copy(), x1[cross].copy()
        nh0, nh1 = h0[cross].copy(), h1[cross].copy()
        nx0[left_neg] = xr[left_neg]
        nh0[left_neg] = 0.0
        nx1[~left_neg] = xr[~left_neg]
        nh1[~left_neg] = 0.0
        x0, x1, h0, h1 = x0.copy(), x1.copy(), h0.copy(), h1.copy()
        x0[cross], x1[cross], h0[cross], h1[cross] = nx0, nx1, nh0, nh1
    return x0, x1, np.maximum(h0, 0.0), np.maximum(h1, 0.0)


def cell_pieces(cfg: ExampleConfig, n: int, k):
    """Linear pieces of H = f − a_{n,k} on the cells k (arrays flattened; owner index)."""
    p = cfg.fractal
    if not 0 <= n <= p.n_max:
        raise ValueError(f"n must lie in [0, {p.n_max}]")
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    sub = 1 << ((p.n_max - n) * p.m + 1)  # pieces of f_{n_max} per level-n cell
    local = np.arange(sub + 1, dtype=float) / sub
    width = 2.0 ** (-n * p.m)
    xs = (k[:, None] + local[None, :]) * width
    fs = fractal_value(p, xs)
    a = np.asarray(spike_base(p, n, k), dtype=float).reshape(-1)
    H = fs - a[:, None]
    owner = np.repeat(np.arange(k.size), sub)
    return (xs[:, :-1].ravel(), xs[:, 1:].ravel(), H[:, :-1].ravel(), H[:, 1:].ravel(), owner, a)


@dataclass
class FormValues:
    grad: np.ndarray
    pot: np.ndarray
    l2: np.ndarray
    h_max: np.ndarray


def form_integrals(cfg: ExampleConfig, n: int, k) -> FormValues:
    """∫|∇u|², ∫V|u|² (λ = 1) and ∫|u|² for each cell in k."""
    x0, x1, h0, h1, owner, _ = cell_pieces(cfg, n, k)
    x0, x1, h0, h1, owner = *_positive_pieces(x0, x1, h0, h1)[:4], owner[(h0 > 0) | (h1 > 0)]
    omega = 2.0 ** (cfg.gamma * cfg.m * n)
    e = cfg.exponent
    jj, s_coef, g_coef = _series_coefficients(omega, e)
    length = x1 - x0
    ncell = int(np.max(owner)) + 1 if owner.size else 0
    ncell = max(ncell, np.atleast_1d(k).size)
    S = np.zeros(length.size)
    P = np.zeros(length.size)
    for j, sc, gc in zip(jj, s_coef, g_coef):
        S += sc * _power_integral(h0, h1, length, 2 * j + 1)
        P += gc * _power_integral(h0, h1, length, e + 1 + 2 * j)
    lin = _power_integral(h0, h1, length, 1.0)
    l2 = np.bincount(owner, S, ncell)
    grad = omega**2 * (np.bincount(owner, lin, ncell) - l2)
    pot = -cfg.constants[2] * np.bincount(owner, P, ncell)
    hmax = np.zeros(ncell)
    np.maximum.at(hmax, owner, np.maximum(h0, h1))
    return FormValues(grad, pot, l2, hmax)


def rayleigh_form(cfg: ExampleConfig, n: int, k: int, lam: float) -> dict:
    """(grad_term, pot_term, total, l2_norm) for one test function, plus the bound checks."""
    fv = form_integrals(cfg, n, [k])
    grad, pot, l2 = float(fv.grad[0]), float(lam * fv.pot[0]), float(fv.l2[0])
    b2, bnabla, _ = cfg.constants
    scale = 2.0 ** (-(cfg.d - 1) * cfg.m * n)
    w = 2.0 ** (cfg.gamma * cfg.m * n)
    return {"grad_term": grad, "pot_term": pot, "total": grad + pot, "l2_norm": l2,
            "l2_lower_bound": b2 * scale / w, "grad_upper_bound": bnabla * scale * w,
            "l2_ok": l2 >= b2 * scale / w, "grad_ok": grad <= bnabla * scale * w,
            "omega_h_max": float(fv.h_max[0] * w)}


# --- certificate ----------------------------------------------------------------

def congruence_key(cfg: ExampleConfig, n: int, k) -> np.ndarray:
    """Cells sharing the oscillation of f_{n−1} carry the same H up to reflection."""
    osc = cell_oscillation(cfg.fractal, n, k) / cfg.fractal.weight(n)
    return np.round(np.atleast_1d(osc), 9)


@dataclass
class CertReport:
    n: int
    lam: float
    log2_lambda: float
    all_negative: bool
    count_lower_bound: int
    ratio: float
    log2_ratio: float
    forms_evaluated: int
    mode: str
    max_total: float
    worst_k: int
    l2_bound_ok: bool
    grad_bound_ok: bool
    classes: list = field(default_factory=list)
    symmetry_max_rel_diff: float | None = None
    offending: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(vars(self))


def certify(cfg: ExampleConfig, n: int, budget: int = DIRECT_BUDGET, symmetry_pairs: int = 10,
            rng: np.random.Generator | None = None) -> CertReport:
    """Evaluate every quadratic form at λ(n) (or one per congruence class above the budget)."""
    p = cfg.fractal
    if not 0 <= n <= p.n_max:
        raise ValueError(f"n must lie in [0, {p.n_max}]")
    lam = lambda_schedule(cfg, n)
    cells = 1 << ((cfg.d - 1) * p.m * n)
    b2, bnabla, _ = cfg.constants
    scale = 2.0 ** (-(cfg.d - 1) * p.m * n)
    w = 2.0 ** (cfg.gamma * p.m * n)
    classes, sym = [], None
    if cells <= budget:
        ks = np.arange(cells)
        mode = "direct"
        weights = np.ones(cells, dtype=np.int64)
    else:
        mode = "congruence"
        rng = rng or np.random.default_rng(0)
        all_k = np.arange(cells)
        keys = congruence_key(cfg, n, all_k)
        uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
        ks, weights = all_k[first], counts
        # verify the symmetry claim on random members of each class
        rels = []
        for _ in range(symmetry_pairs):
            ci = rng.integers(uniq.size)
            members = np.flatnonzero(keys == uniq[ci])
            pair = rng.choice(members, size=2, replace=members.size < 2)
            fv = form_integrals(cfg, n, pair)
            for arr in (fv.grad, fv.pot, fv.l2):
                rels.append(abs(arr[0] - arr[1]) / max(abs(arr[0]), 1e-300))
        sym = float(max(rels))
    fv = form_integrals(cfg, n, ks)
    total = fv.grad + lam * fv.pot
    for i, kk in enumerate(ks):
        if mode == "congruence":
            classes.append({"key": float(uniq[i]), "representative": int(kk), "members": int(weights[i]),
                            "total": float(total[i])})
    bad = np.flatnonzero(total >= 0)
    worst = int(np.argmax(total))
    return CertReport(
        n=n, lam=lam, log2_lambda=lambda_log2(cfg, n), all_negative=bool(bad.size == 0),
        count_lower_bound=cells, ratio=2.0 ** ratio_log2(cfg, n), log2_ratio=ratio_log2(cfg, n),
        forms_evaluated=int(ks.size), mode=mode, max_total=float(total[worst]), worst_k=int(ks[worst]),
        l2_bound_ok=bool(np.all(fv.l2 >= b2 * scale / w)),
        grad_bound_ok=bool(np.all(fv.grad <= bnabla * scale * w)),
        classes=classes, symmetry_max_rel_diff=sym,
        offending=[int(ks[i]) for i in bad[:20]])
