import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlab.covering import (CoverFamilies, ProbeGrid, assign_families, averaged_potential_lower_bound,
                                boundary_layer_mask, classify_kind, domain_exponents, count_vs_bound, domains_intersect,
                                greedy_cover, interior_cube, local_geometry_checks, make_oscillatory_domain,
                                open_rect_meets_domain, select_delta, throttled_width, verify_cover)
from holderlab.domain import ChartMissError, build_domain
from holderlab.exponents import compute_exponents
from holderlab.norms import young_llogl
from holderlab.potentials import constant_potential, zero_potential
from holderlab.spectral import assemble, lowest_eigenvalues, triangulate

SQ = build_domain({"flat": 1.0})
FR = build_domain({"fractal": {"gamma": 0.75, "m": 8, "n_max": 1, "strict": False}})
ES = compute_exponents(2, 0.75, 1.0)


def brute_disjoint(dom, fam):
    rects = [d.rect for d in fam]
    return not any(domains_intersect(dom, rects[i], rects[j])
                   for i in range(len(rects)) for j in range(i + 1, len(rects)))


def test_flat_cover_is_a_tiling():
    cf = greedy_cover(SQ, zero_potential(), 0.25)
    rep = verify_cover(cf, SQ)
    assert rep.pairwise_disjoint and rep.coverage_fraction == 1.0
    for _, fam in cf.families:
        assert brute_disjoint(SQ, fam)
    assert cf.size * 0.25**2 >= SQ.area()


def test_fractal_cover_brute_force_disjoint():
    cf = greedy_cover(FR, zero_potential(), 2.0**-3)
    rep = verify_cover(cf, FR)
    assert rep.pairwise_disjoint and rep.coverage_fraction == 1.0
    for _, fam in cf.families:
        assert brute_disjoint(FR, fam)


def test_fine_probe_grid_is_covered():
    from holderlab.covering import probe_grid
    cf = greedy_cover(FR, zero_potential(), 2.0**-3)
    fine = probe_grid(FR, 2.0**-3, domain_exponents(FR), 2.0, interior="fine")
    assert verify_cover(cf, FR, fine).coverage_fraction == 1.0


def test_single_probe_point_gives_one_domain():
    probe = ProbeGrid.from_points([0.5], [0.5])
    cf = greedy_cover(SQ, zero_potential(), 0.25, probe=probe)
    assert cf.size == 1 and cf.K_used == 1


def test_duplicate_domain_is_detected():
    cf = greedy_cover(SQ, zero_potential(), 0.5)
    cls, fam = cf.families[0]
    bad = CoverFamilies([(cls, fam + [fam[0]])], 1, cf.delta0, cf.region, {}, cf.probe, {})
    assert not verify_cover(bad, SQ).pairwise_disjoint


def test_assign_families_never_mixes_intersecting():
    ods = [interior_cube((0.3, 0.3), 0.4), interior_cube((0.5, 0.5), 0.4), interior_cube((0.8, 0.2), 0.2)]
    fams = assign_families(SQ, ods, 0.4)
    assert len(fams) == 2
    assert [len(f) for f in fams] == [2, 1]


def test_j_partition_sums_to_total():
    cf = greedy_cover(FR, zero_potential(), 2.0**-3)
    J = verify_cover(cf, FR).J_sizes
    assert J["case1"] + J["case2"] + J["case3"] + J["interior"] == J["total"] == cf.size
    assert count_vs_bound(cf, 2.0**-3) == pytest.approx(cf.size / 64)


def test_make_oscillatory_domain_examples():
    od = make_oscillatory_domain(FR, (0.5, 0.4), 0.05, ES)
    h = float(FR.f(0.5)) - 0.4
    assert od.h_center == pytest.approx(h)
    assert od.a == pytest.approx(min(0.05, ES.c0 * max(h, 16 * 0.05) ** (1 / 0.75)))
    assert od.kind == classify_kind(h, 0.05, ES)
    with pytest.raises(ChartMissError):
        make_oscillatory_domain(FR, (0.5, 5.0), 0.05, ES)


@given(h=st.floats(1e-6, 1.0), delta=st.floats(1e-6, 0.5))
def test_throttled_width_bounds(h, delta):
    a = throttled_width(h, delta, ES)
    assert 0 < a <= delta
    assert a >= min(delta, ES.c2 * delta ** (1 / ES.gamma)) * (1 - 1e-12)


def test_open_rect_semantics():
    assert open_rect_meets_domain(SQ, (0.2, 0.4, 0.2, 0.4))
    assert not open_rect_meets_domain(SQ, (0.2, 0.4, 1.0, 1.2))  # touches the top only
    assert not open_rect_meets_domain(SQ, (0.2, 0.2, 0.1, 0.4))  # degenerate


def test_boundary_layer_mask_flat():
    y = np.array([0.1, 0.8, 0.9])
    mask = boundary_layer_mask(SQ, np.full(3, 0.5), y, 0.25)
    assert mask.tolist() == [False, False, True]


@pytest.mark.parametrize("v", [10.0, 50.0, 200.0])
def test_interior_delta_closed_form(v):
    # Luxemburg condition on a full cube of side δ: δ²·B(v) ≤ 1
    delta, tag = select_delta(SQ, constant_potential(-v), (0.5, 0.3), 0.25, ES)
    expected = min(0.25, young_llogl(v) ** -0.5)
    assert tag == "interior"
    assert delta == pytest.approx(expected, rel=2e-3)
    assert delta <= expected * (1 + 1e-9)


@pytest.mark.parametrize("spec", [{"fractal": {"gamma": 0.75, "m": 8, "n_max": 1, "strict": False}},
                                  {"fractal": {"gamma": 0.6, "m": 10, "n_max": 1}}])
def test_local_geometry_checks_pass(spec):
    dom = build_domain(spec)
    cf = greedy_cover(dom, zero_potential(), 2.0**-3)
    reports = [local_geometry_checks(od, dom) for od in cf.domains]
    assert all(r["ok"] for r in reports)
    assert any("h_deviation" in r for r in reports)


def test_flat_limit_cuboids_cross_the_top_only_near_it():
    # γ = 1, c = 0: a = δ for every layer point, so cubes centred within δ/2 of the
    # top stick out; that is the only property allowed to fail
    cf = greedy_cover(SQ, zero_potential(), 2.0**-3)
    for od in cf.domains:
        rep = local_geometry_checks(od, SQ)
        items = {v["item"] for v in rep["violations"]}
        assert items <= {"full_rectangle"}
        if items:
            assert od.h_center < od.delta / 2


def single_cube_cover(dom, side=1.0):
    od = interior_cube((0.5 * side, 0.5 * side), side)
    return CoverFamilies([("interior", [od])], 1, side, "full", {}, None, {})


def test_averaged_bound_constant_potential():
    cf = single_cube_cover(SQ)
    assert averaged_potential_lower_bound(cf, SQ, constant_potential(-1.0)) == pytest.approx(2.0)
    assert averaged_potential_lower_bound(cf, SQ, zero_potential()) == 0.0


def test_averaged_bound_controls_ground_state():
    V = constant_potential(-3.0)
    bound = averaged_potential_lower_bound(single_cube_cover(SQ), SQ, V)
    op = assemble(triangulate(SQ, 1 / 16), SQ, V.scaled(2.0), 1.0, "neumann")
    # eigenvalues of ½(−Δ) + V are half those of −Δ + 2V
    ground = 0.5 * lowest_eigenvalues(op, 1, 1e-10)[0]
    assert ground >= -bound


def test_emission_order_and_variable_delta_cover():
    from holderlab.potentials import h_power_potential
    V = h_power_potential(-15.0, -0.3)
    cf = greedy_cover(SQ, V, 0.5)
    rep = verify_cover(cf, SQ)
    assert rep.pairwise_disjoint and rep.coverage_fraction == 1.0
    for ods in cf.emission.values():
        d = np.array([od.delta for od in ods])
        assert np.all(d[1:] <= 2 * np.minimum.accumulate(d)[:-1])
    assert len({od.delta for od in cf.domains}) > 1
    # the probe grid was refined to the smallest δ, so random points of Ω are covered too
    pts = np.random.default_rng(7).random((4000, 2))
    rects = np.array([od.rect for od in cf.domains])
    inside = ((rects[None, :, 0] <= pts[:, None, 0]) & (pts[:, None, 0] <= rects[None, :, 1])
              & (rects[None, :, 2] <= pts[:, None, 1]) & (pts[:, None, 1] <= rects[None, :, 3]))
    assert inside.any(axis=1).all()
