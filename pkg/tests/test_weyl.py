import math

import numpy as np
import pytest
from scipy.stats import theilslopes

from holderlab.domain import build_domain
from holderlab.potentials import constant_potential, tent_potential, zero_potential
from holderlab.weyl import (ResolutionError, bracketing_check, check_resolution, clr_bound_check,
                            semiclassical_count, square_dirichlet_count, square_neumann_count, weyl_constant,
                            weyl_scan)

SQ = build_domain({"flat": 1.0})


def brute_lattice(lam, start):
    n = int(math.sqrt(lam) / math.pi) + 2
    return sum(1 for j in range(start, n + 1) for k in range(start, n + 1)
               if math.pi**2 * (j * j + k * k) < lam)


@pytest.mark.parametrize("lam", [1.0, 10.0, 50.0, 500.0, 2000.0])
def test_lattice_counts(lam):
    assert square_neumann_count(lam) == brute_lattice(lam, 0)
    assert square_dirichlet_count(lam) == brute_lattice(lam, 1)


def test_known_small_counts():
    assert square_neumann_count(50.0) == 8
    assert square_dirichlet_count(50.0) == 3


def test_lattice_weyl_error_is_sqrt_order():
    lams = np.array([1e3, 4e3, 1.6e4, 6.4e4, 2.56e5])
    err = np.array([abs(square_neumann_count(l) - l / (4 * math.pi)) for l in lams])
    slope = theilslopes(np.log(err), np.log(lams))[0]
    assert 0.3 < slope < 0.7


def test_semiclassical_count():
    assert weyl_constant(2) == pytest.approx(1 / (4 * math.pi))
    assert semiclassical_count(constant_potential(-1.0), SQ, 4 * math.pi) == pytest.approx(1.0)
    assert semiclassical_count(zero_potential(), SQ, 100.0) == 0.0


def test_resolution_gate():
    check_resolution(1 / 64, 2000.0, constant_potential(-1.0), SQ)
    with pytest.raises(ResolutionError):
        check_resolution(1 / 8, 2000.0, constant_potential(-1.0), SQ)


def test_scan_matches_shifted_lattice():
    # −Δ − λ on the square: count = #{π²(j²+k²) < λ}; FEM undercounts only near the top
    rows = weyl_scan(SQ, constant_potential(-1.0), [100.0, 200.0, 400.0], 1 / 64)
    for r in rows:
        exact = square_neumann_count(r.lam)
        assert exact - 2 <= r.fem_count <= exact


def test_bracketing_sandwich():
    W = tent_potential((0.5, 0.5), 0.25, 1.0)
    res = bracketing_check(SQ, W, 2, 500.0, 1 / 32)
    assert res.sandwich
    assert res.cubes == 16


def test_bracketing_rejects_misaligned():
    with pytest.raises(ValueError):
        bracketing_check(build_domain({"flat": 0.3}), tent_potential(), 2, 100.0, 1 / 32)


def test_clr_table_zero_potential():
    tab = clr_bound_check(SQ, zero_potential(), None, [100.0, 200.0], 1 / 16)
    assert tab.fitted_C == 0.0 and all(r["fem_count"] == 0 for r in tab.rows)


def test_clr_rejects_infinite_norm():
    from holderlab.potentials import h_power_potential
    with pytest.raises(ValueError):
        clr_bound_check(SQ, h_power_potential(-1.0, -1.0), None, [100.0], 1 / 16)
