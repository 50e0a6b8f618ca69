import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from holderlab.counterexample import (ExampleConfig, build_example, certify, congruence_key, cubic_margin,
                                      epsilon_admissible, epsilon_max, example_constants, form_integrals,
                                      lambda_log2, lambda_schedule, ratio_growth_log2, ratio_log2,
                                      rayleigh_form)
from holderlab.domain import eval_fractal_boundary, spike_base
from holderlab.exponents import compute_exponents
from holderlab.norms import divergence_slope

CFG1 = ExampleConfig(gamma=0.6, m=10, n_max=1, epsilon=0.3)


def quad_forms(cfg, n, k):
    """Nested adaptive quadrature straight from the definitions of u, ∇u and V."""
    p = cfg.fractal
    w = 2.0 ** (cfg.gamma * cfg.m * n)
    a = float(spike_base(p, n, k))
    bV = example_constants(cfg.d)[2]
    e = cfg.exponent
    x0, x1 = k * 2.0 ** (-cfg.m * n), (k + 1) * 2.0 ** (-cfg.m * n)

    def H(x):
        return max(float(eval_fractal_boundary(p, x, level=p.n_max)) - a, 0.0)

    def l2(x):
        return quad(lambda y: math.sin(w * (y - a)) ** 2, a, a + H(x))[0] if H(x) > 0 else 0.0

    def grad(x):
        return quad(lambda y: w * w * math.cos(w * (y - a)) ** 2, a, a + H(x))[0] if H(x) > 0 else 0.0

    def pot(x):
        h = H(x)
        if h <= 0:
            return 0.0
        # s = f − y, weight s^e
        return -bV * quad(lambda s: math.sin(w * (h - s)) ** 2, 0, h, weight="alg", wvar=(e, 0))[0]

    brk = [x0 + t * (x1 - x0) for t in (0.25, 0.5, 0.75)]
    out = []
    for fn in (grad, pot, l2):
        out.append(quad(fn, x0, x1, points=brk, limit=200, epsabs=0, epsrel=1e-11)[0])
    return out


def test_constants():
    b2, bn, bv = example_constants(2)
    assert b2 == pytest.approx(0.5 * (1 / 16 - math.sin(0.25) / 4))
    assert b2 == pytest.approx(3.2451e-4, rel=1e-4)
    assert bn == pytest.approx(0.7273244, rel=1e-7)
    assert bv == pytest.approx(4.4827e3, rel=1e-4)
    # closed forms against the integrals they stand for
    assert b2 == pytest.approx(0.5 * quad(lambda t: math.sin(t) ** 2, 0, 1 / 8)[0], rel=1e-12)
    assert bn == pytest.approx(quad(lambda t: math.cos(t) ** 2, 0, 1)[0], rel=1e-12)


@pytest.mark.parametrize("k", [0, 1, 511, 512, 1023])
def test_forms_match_nested_quadrature(k):
    fv = form_integrals(CFG1, 1, [k])
    ref = quad_forms(CFG1, 1, k)
    assert fv.grad[0] == pytest.approx(ref[0], rel=1e-9)
    assert fv.pot[0] == pytest.approx(ref[1], rel=1e-8)
    assert fv.l2[0] == pytest.approx(ref[2], rel=1e-9)


def test_lambda_schedule():
    assert lambda_schedule(CFG1, 0) == 1.0
    assert lambda_log2(CFG1, 1) == pytest.approx(7.8)
    assert lambda_schedule(CFG1, 1) == pytest.approx(222.86, abs=0.01)
    cfg2 = ExampleConfig(epsilon=0.3)
    assert lambda_log2(cfg2, 2) == pytest.approx(15.6)


@given(eps=st.floats(0.01, 2 / 3), n=st.integers(0, 5))
def test_ratio_exponent_arithmetic(eps, n):
    cfg = ExampleConfig(epsilon=eps, n_max=2)
    step = ratio_log2(cfg, n + 1) - ratio_log2(cfg, n)
    assert step == pytest.approx(ratio_growth_log2(cfg), abs=1e-9)
    assert ratio_growth_log2(cfg) == pytest.approx(10 * (1 - 0.6 * (1 + eps)))


def test_boundary_epsilon_has_no_growth():
    cfg = ExampleConfig(epsilon=epsilon_max(2, 0.6), n_max=1)
    assert ratio_growth_log2(cfg) == pytest.approx(0.0, abs=1e-12)


def test_rayleigh_zero_lambda():
    r = rayleigh_form(CFG1, 1, 3, 0.0)
    assert r["total"] == r["grad_term"] > 0
    assert r["l2_ok"] and r["grad_ok"]
    assert r["omega_h_max"] <= 1.0 + 1e-12


def test_certify_level_one():
    rep = certify(CFG1, 1)
    assert rep.mode == "direct" and rep.forms_evaluated == 1024
    assert rep.all_negative and rep.count_lower_bound == 1024
    assert rep.log2_ratio == pytest.approx(2.2)
    assert rep.l2_bound_ok and rep.grad_bound_ok


def test_congruence_classes_agree_with_direct():
    cfg = ExampleConfig(epsilon=0.3, n_max=2)
    ks = np.arange(0, 1 << 20, 4099)
    fv = form_integrals(cfg, 2, ks)
    keys = congruence_key(cfg, 2, ks)
    for key in np.unique(keys):
        sel = keys == key
        for arr in (fv.grad, fv.pot, fv.l2):
            vals = arr[sel]
            assert np.ptp(vals) <= 1e-9 * np.abs(vals).max()


def test_certify_level_two_congruence():
    rep = certify(ExampleConfig(epsilon=0.3, n_max=2), 2, rng=np.random.default_rng(1))
    assert rep.mode == "congruence"
    assert sum(c["members"] for c in rep.classes) == 1 << 20
    assert rep.all_negative
    assert rep.symmetry_max_rel_diff < 1e-8
    assert rep.log2_ratio == pytest.approx(4.4)


def test_epsilon_admissible():
    rep = epsilon_admissible(2, 0.6)
    assert rep["interval"][1] == pytest.approx(2 / 3)
    assert rep["f_at_d"] == -1.0
    assert rep["f_decreasing"] and rep["cubic_ok"] and rep["eps_check_at_max"]
    rep3 = epsilon_admissible(3, 0.7)
    assert rep3["interval"][1] == pytest.approx(6 / 7)
    assert float(cubic_margin(3, 3)) == -1.0


def test_potential_values():
    dom, V = build_example(ExampleConfig(epsilon=0.3, n_max=1))
    x = 0.5
    y = float(dom.f(x)) - 0.01
    bv = example_constants(2)[2]
    assert V.evaluate(dom, np.array([x]), np.array([y]))[0] == pytest.approx(-bv * 0.01 ** -0.7, rel=1e-10)
    assert np.all(V.evaluate(dom, np.array([0.0, 1.0]), np.array([-1.0, -0.5])) == 0.0)


def test_norm_diverges_at_boundary_epsilon():
    es = compute_exponents(2, 0.6, 3.0)
    dom, V = build_example(ExampleConfig(epsilon=epsilon_max(2, 0.6), n_max=1))
    rep = divergence_slope(V, dom, es.ptilde, es.beta)
    assert rep.diverges
