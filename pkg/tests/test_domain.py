import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holderlab.domain import (ChartMissError, FractalParams, build_domain, cell_oscillation,
                              eval_fractal_boundary, h_at, holder_check, spike_base,
                              spike_window_scan)

P = FractalParams(0.6, 10, 2)


def tent_sum(x, gamma, m, level):
    # scalar reference with explicit cell lookup
    total = 0.0
    for j in range(level + 1):
        t = x * 2 ** (j * m)
        k = int(np.floor(t))
        total += 2 ** (-gamma * j * m) * (0.5 - abs(t - k - 0.5))
    return total


def test_fractal_values():
    assert eval_fractal_boundary(P, 0.5) == 0.5
    x = 2.0 ** -11
    assert eval_fractal_boundary(P, x) == pytest.approx(x + 2 ** (-6) / 2, rel=1e-14)
    assert eval_fractal_boundary(P, 0.3, level=-1) == 0.0


@given(x=st.floats(1e-6, 1 - 1e-6), level=st.integers(0, 2))
def test_fractal_against_scalar_reference(x, level):
    assert eval_fractal_boundary(P, x, level) == pytest.approx(tent_sum(x, 0.6, 10, level), abs=1e-15)


@pytest.mark.parametrize("x", [0.0, 1.0, -0.2])
def test_rejects_outside(x):
    with pytest.raises(ValueError):
        eval_fractal_boundary(P, x)


def test_spike_base():
    assert spike_base(P, 0, 0) == 0.0
    assert spike_base(P, 1, 0) == pytest.approx(2.0**-10)
    assert spike_base(P, 1, 2**9) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        spike_base(P, 1, 2**10)


def test_param_constraints():
    with pytest.raises(ValueError):
        FractalParams(0.6, 5, 1)  # m(1-γ) = 2 < 4
    with pytest.raises(ValueError):
        FractalParams(0.4, 10, 1)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_spike_window_exact_scan(n):
    rep = spike_window_scan(P, n)
    assert rep["lower_violations"] == 0
    assert rep["upper_violations"] == 0
    assert rep["min_window_excess"] >= rep["lower_bound"]


def test_level_oscillation_within_cell():
    for n in (1, 2):
        k = np.arange(0, 1 << (n * P.m), 97)
        assert np.all(cell_oscillation(P, n, k) <= P.weight(n) / 8 * (1 + 1e-12))


def test_holder_constant():
    assert holder_check(FractalParams(0.6, 10, 3), 100_000, 0) <= 3.0
    assert holder_check(build_domain({"flat": 1.0}), 1000, 0) == 0.0


def test_domain_shapes():
    sq = build_domain({"flat": 1.0})
    assert not sq.base and sq.area() == pytest.approx(1.0)
    roof = build_domain({"samples": [[0, 0.5], [0.5, 1.0], [1, 0.5]]})
    assert roof.area() == pytest.approx(0.75)
    fr = build_domain({"fractal": {"gamma": 0.6, "m": 10, "n_max": 2}})
    assert fr.base and fr.xs.size == 2 ** 21 + 1
    assert fr.fs.min() >= 0
    assert fr.area() == pytest.approx(fr.shoelace_area(), rel=1e-12)
    # breakpoint values are reproduced bit-exactly
    assert np.array_equal(fr.f(fr.xs[::4097]), fr.fs[::4097])


def test_h_at():
    sq = build_domain({"flat": 1.0})
    assert h_at(sq, (0.3, 0.25)) == pytest.approx(0.75)
    fr = build_domain({"fractal": {"gamma": 0.6, "m": 10, "n_max": 1}})
    assert h_at(fr, (0.5, 0.25)) == pytest.approx(0.25)
    with pytest.raises(ChartMissError):
        h_at(fr, (0.3, -0.5))


def test_boundary_layer_points_are_in_chart(rng):
    fr = build_domain({"fractal": {"gamma": 0.6, "m": 10, "n_max": 1}})
    x = rng.uniform(0.01, 0.99, 5000)
    y = fr.f(x) - rng.uniform(1e-9, fr.h_omega, x.size)
    y = np.maximum(y, 1e-9)
    assert np.all(fr.in_chart(x, y))
    assert np.all(fr.contains(x, y))
