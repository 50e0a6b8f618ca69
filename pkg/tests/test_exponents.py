import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlab.exponents import (beta_below_one_gamma, compute_exponents, delta0,
                                 oscillation_constants, verify_exponent_identities)


def reference_exponents(d, gamma):
    # written out from the defining formulas, kept apart from the module's arithmetic
    mu = (d - 1) / gamma + 1
    q = mu**2 / d
    return {
        "beta": mu * (q - d) / (d + 1),
        "ptilde": mu**2 / (2 * d),
        "inv_sprime": (q - d) / (q + 1),
        "inv_s": (d + 1) / (q + 1),
        "omega": mu * (q - d) / (q + 1),
    }


def test_gamma_three_quarters_values():
    es = compute_exponents(2, 0.75, 1.0)
    assert es.mu == pytest.approx(7 / 3)
    assert es.ptilde == pytest.approx(1.3611, abs=1e-4)
    assert es.beta == pytest.approx(0.5617, abs=1e-4)
    assert 1 / es.sprime == pytest.approx(0.19403, abs=1e-5)
    assert 1 / es.s == pytest.approx(0.80597, abs=1e-5)
    # closed form mu*(q-d)/(q+1) = 0.452736; zeta likewise 0.621891; tabulated values differ in the fifth digit
    assert es.omega == pytest.approx(0.45274, abs=2e-5)
    assert es.zeta == pytest.approx(0.62189, abs=4e-5)


def test_critical_gamma_values():
    es = compute_exponents(2, 0.5, 1.0)
    assert es.mu == pytest.approx(3.0)
    assert es.beta == pytest.approx(2.5)
    assert es.ptilde == pytest.approx(9 / 4)
    assert verify_exponent_identities(es)["zeta_condition"]


def test_lipschitz_limit():
    es = compute_exponents(2, 1.0, 1.0)
    assert es.beta == 0.0
    assert es.ptilde == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_rejects_gamma(bad):
    with pytest.raises(ValueError):
        compute_exponents(2, bad, 1.0)


def test_rejects_dimension():
    with pytest.raises(ValueError):
        compute_exponents(1, 0.5, 1.0)


@given(d=st.integers(2, 6), t=st.floats(0.0, 0.999))
def test_identities_hold(d, t):
    gamma = (d - 1) / d + t * (1 - (d - 1) / d)
    es = compute_exponents(d, gamma, 1.0)
    ref = reference_exponents(d, gamma)
    assert es.beta == pytest.approx(ref["beta"], rel=1e-12, abs=1e-14)
    assert es.ptilde == pytest.approx(ref["ptilde"], rel=1e-12)
    assert es.omega == pytest.approx(ref["omega"], rel=1e-12, abs=1e-14)
    rep = verify_exponent_identities(es)
    assert rep["max_residual"] < 1e-10
    assert rep["zeta_condition"]
    assert d < es.mu <= d + 1 + 1e-12
    assert es.ptilde > d / 2


@given(d=st.integers(2, 6), t=st.floats(0.0, 0.999))
def test_beta_below_one_on_upper_range(d, t):
    g0 = beta_below_one_gamma(d)
    gamma = g0 + t * (1 - g0)
    assert compute_exponents(d, gamma, 1.0).beta < 1


@given(gamma=st.floats(0.5, 1.0), c=st.floats(0.01, 50), c2=st.floats(0.01, 50))
def test_c0_monotone_in_c(gamma, c, c2):
    lo, hi = sorted([c, c2])
    assert oscillation_constants(gamma, hi)[0] <= oscillation_constants(gamma, lo)[0] * (1 + 1e-12)
    es = compute_exponents(2, gamma, c)
    assert es.c2 == pytest.approx(es.c0 * 16 ** (1 / gamma), rel=1e-12)


def test_c0_branches():
    gamma, c = 0.7, 3.0
    c0, _ = oscillation_constants(gamma, c)
    expected = min(1 / 16, 2**gamma / (64 * c), 1 / (2 ** (gamma + 3) * c)) ** (1 / gamma)
    assert c0 == pytest.approx(expected, rel=1e-14)


def test_approach_to_lipschitz():
    vals = [compute_exponents(2, g, 1.0) for g in (0.9, 0.99, 0.999)]
    assert vals[-1].beta < vals[0].beta
    assert abs(vals[-1].ptilde - 1.0) < 0.01


@pytest.mark.parametrize("norm,h,expected", [(9, 0.5, 1 / 3), (0, 0.5, 0.5 / math.sqrt(2)),
                                             (1, 0.9, 0.9 / math.sqrt(2))])
def test_delta0(norm, h, expected):
    assert delta0(norm, h, 2) == pytest.approx(expected)
