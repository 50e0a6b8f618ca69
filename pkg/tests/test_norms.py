import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from holderlab.domain import build_domain
from holderlab.exponents import compute_exponents
from holderlab.norms import (combined_norm, divergence_slope, lp_norm, norm_comparison, orlicz_norm,
                             weighted_seminorm, young_llogl)
from holderlab.potentials import constant_potential, h_power_potential, zero_potential

SQ = build_domain({"flat": 1.0})


def test_lp_closed_forms():
    assert lp_norm(constant_potential(-1.0), SQ, 2) == pytest.approx(1.0)
    half = build_domain({"flat": 0.5})
    assert lp_norm(constant_potential(-1.0), half, 3) == pytest.approx(0.5 ** (1 / 3))
    assert lp_norm(h_power_potential(-1.0, -0.5), SQ, 1) == pytest.approx(2.0, rel=1e-6)
    assert math.isinf(lp_norm(h_power_potential(-1.0, -1.0), SQ, 1))


def test_seminorm_closed_forms():
    assert weighted_seminorm(constant_potential(-1.0), SQ, 1, 0.5) == pytest.approx(2.0, rel=1e-6)
    assert weighted_seminorm(zero_potential(), SQ, 2, 0.7) == 0.0
    eta = 0.01
    assert weighted_seminorm(constant_potential(-1.0), SQ, 1, 0.5, eta) == pytest.approx(2 * (1 - 0.1), rel=1e-6)


def test_seminorm_beta_zero_matches_lp():
    V = h_power_potential(-2.0, -0.3)
    assert weighted_seminorm(V, SQ, 2, 0.0) == pytest.approx(lp_norm(V, SQ, 2), rel=1e-8)


def test_seminorm_monotone_in_eta():
    V = h_power_potential(-1.0, -0.2)
    vals = [weighted_seminorm(V, SQ, 1.5, 0.4, e) for e in (0.0, 1e-3, 1e-2, 1e-1)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_orlicz_constant(a):
    root = brentq(lambda u: (1 + u) * math.log1p(u) - u - 1, 1e-6, 100)
    assert orlicz_norm(constant_potential(-a), SQ) == pytest.approx(a / root, rel=1e-10)


def test_orlicz_root_and_monotone():
    V = h_power_potential(-1.0, -0.4)
    t = orlicz_norm(V, SQ)
    integral = quad(lambda h: young_llogl(h**-0.4 / t), 0, 1, limit=200)[0]
    assert integral == pytest.approx(1.0, abs=1e-4)
    assert orlicz_norm(V.scaled(2.0), SQ) >= t
    assert orlicz_norm(zero_potential(), SQ) == 0.0


def test_combined_norm_flat():
    es = compute_exponents(2, 0.75, 1.0)
    V = constant_potential(-1.0)
    semi = quad(lambda h: h ** (-es.beta), 0, 1)[0] ** (1 / es.ptilde)
    assert combined_norm(V, SQ, es) == pytest.approx(orlicz_norm(V, SQ) + semi, rel=1e-6)
    assert combined_norm(zero_potential(), SQ, es) == 0.0


def test_quadrature_convergence():
    V = h_power_potential(-1.0, -0.45)
    for fn in (lambda r: lp_norm(V, SQ, 1.5, r), lambda r: weighted_seminorm(V, SQ, 1.2, 0.3, 0.0, r)):
        assert abs(fn(5) / fn(4) - 1) < 5e-3


def test_norm_comparison_family():
    es = compute_exponents(2, 0.75, 1.0)
    ratios = [norm_comparison(constant_potential(-a), SQ, 3.2, es)["ratio"] for a in (1, 2, 4, 8)]
    assert max(ratios) / min(ratios) < 2
    reps = [norm_comparison(constant_potential(-a), SQ, 3.2, es) for a in (1, 8)]
    assert all(r["holds"] for r in reps)


def test_comparison_boundary_gamma():
    es = compute_exponents(2, 2 / 3, 1.0)
    assert es.beta == pytest.approx(0.9375)
    assert es.ptilde / (1 - es.beta) == pytest.approx(25.0)
    assert norm_comparison(constant_potential(-1.0), SQ, 26, es)["holds"]
    with pytest.raises(ValueError):
        norm_comparison(constant_potential(-1.0), SQ, 20, es)


def test_jensen_chain():
    V = h_power_potential(-1.0, -0.2)
    half = build_domain({"flat": 0.5})
    assert lp_norm(V, half, 1.0) <= half.area() ** (1 - 1 / 3) * lp_norm(V, half, 3) * (1 + 1e-9)


def test_divergence_detection():
    conv = divergence_slope(constant_potential(-1.0), SQ, 1, 0.5)
    assert not conv.diverges and conv.rate_exponent < 0
    div = divergence_slope(h_power_potential(-1.0, -0.5), SQ, 1, 0.5)
    assert div.diverges
    assert div.integrals[-1] == pytest.approx(math.log(1 / div.etas[-1]), rel=1e-4)
