"""Exponents and constants derived from the dimension d and the Hölder data (γ, c)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

C1 = 16.0


@dataclass(frozen=True)
class ExponentSet:
    d: int
    gamma: float
    c: float
    mu: float
    beta: float
    ptilde: float
    qstar: float
    pstar: float
    rtilde: float
    s: float
    sprime: float
    omega: float
    zeta: float
    c0: float
    c1: float
    c2: float

    def as_dict(self) -> dict:
        return asdict(self)


def _check(d: int, gamma: float, c: float) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    if c < 0 or not math.isfinite(c):
        raise ValueError(f"Hölder constant c must be finite and >= 0, got {c!r}")


def _inv(x: float) -> float:
    return math.inf if x == 0.0 else 1.0 / x


def oscillation_constants(gamma: float, c: float, c1: float = C1) -> tuple[float, float]:
    """Return (c0, c2) for the throttling rule a = min(δ, c0·max(h, c1·δ)^{1/γ}).

    c = 0 (constant boundary function) makes the two c-dependent branches infinite,
    leaving c0 = c1^{-1/γ} and c2 = 1.
    """
    if c == 0:
        inner = 1.0 / c1
    else:
        inner = min(1.0 / c1, 2.0**gamma / (64.0 * c), 1.0 / (2.0 ** (gamma + 3.0) * c))
    c0 = inner ** (1.0 / gamma)
    return c0, c0 * c1 ** (1.0 / gamma)


def compute_exponents(d: int, gamma: float, c: float = 1.0) -> ExponentSet:
    _check(d, gamma, c)
    d = int(d)
    mu = (d - 1) / gamma + 1.0
    bracket = mu * mu / d - d
    beta = mu * bracket / (d + 1)
    ptilde = mu * mu / (2.0 * d)
    inv_q = 0.5 - 1.0 / mu
    inv_p = 2.0 / mu
    inv_r = inv_p - 1.0 / ptilde
    inv_sprime = bracket / (mu * mu / d + 1.0)
    inv_s = (d + 1) / (mu * mu / d + 1.0)
    omega = mu * inv_sprime
    zeta = inv_s * (-beta + (d - 1) / gamma)
    c0, c2 = oscillation_constants(gamma, c)
    return ExponentSet(
        d=d,
        gamma=float(gamma),
        c=float(c),
        mu=mu,
        beta=beta,
        ptilde=ptilde,
        qstar=_inv(inv_q),
        pstar=_inv(inv_p),
        rtilde=_inv(inv_r),
        s=_inv(inv_s),
        sprime=_inv(inv_sprime),
        omega=omega,
        zeta=zeta,
        c0=c0,
        c1=C1,
        c2=c2,
    )


def verify_exponent_identities(es: ExponentSet) -> dict:
    """Residuals of the algebraic identities linking s, s', ω, ζ, β and p̃.

    The reciprocal forms are used so that the degenerate case γ = 1 (s' = ∞)
    still yields finite residuals for the identities that make sense there.
    """
    inv_s = 1.0 / es.s
    inv_sp = 0.0 if math.isinf(es.sprime) else 1.0 / es.sprime
    res = {
        "holder_pair": inv_s + inv_sp - 1.0,
        "omega_sprime": (es.omega / inv_sp - es.mu) if inv_sp > 0 else None,
        "omega_s": es.omega / inv_s - es.beta,
        "ptilde_balance": -2.0 * es.ptilde * inv_s + inv_sp + es.d,
    }
    zeta_margin = (es.zeta / inv_sp + (es.d - 1) / es.gamma - 1.0) if inv_sp > 0 else math.inf
    finite = [abs(v) for v in res.values() if v is not None]
    return {
        "residuals": res,
        "max_residual": max(finite),
        "zeta_condition": zeta_margin > 0,
        "zeta_margin": zeta_margin,
        "c2_residual": es.c2 - es.c0 * es.c1 ** (1.0 / es.gamma),
    }


def delta0(norm_value: float, h_omega: float, d: int) -> float:
    """Global length scale min(h_Ω/√d, ‖V‖^{-1/2}); a zero norm gives h_Ω/√d."""
    if norm_value < 0 or math.isnan(norm_value):
        raise ValueError(f"norm_value must be >= 0, got {norm_value!r}")
    if h_omega <= 0:
        raise ValueError(f"h_omega must be > 0, got {h_omega!r}")
    cap = h_omega / math.sqrt(d)
    if norm_value == 0:
        return cap
    if math.isinf(norm_value):
        return 0.0
    return min(cap, norm_value**-0.5)


def beta_below_one_gamma(d: int) -> float:
    """Smallest γ of the family on which β < 1 is guaranteed: 2(d−1)/(2d−1)."""
    return 2.0 * (d - 1) / (2.0 * d - 1.0)


def beta_chain_bound(d: int) -> float:
    """Upper bound for β at γ = 2(d−1)/(2d−1) from the elementary estimate chain."""
    return d * d / (d + 1.0) * (1 + 1 / (2.0 * d)) * (1.0 / d) * (1 + 1 / (4.0 * d))
