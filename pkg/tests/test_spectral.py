import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import eigh

from holderlab.domain import build_domain
from holderlab.potentials import constant_potential, tent_potential, zero_potential
from holderlab.spectral import (assemble, count_below, hat_domain, lowest_eigenvalues, rectangle_mesh,
                                triangulate)
from holderlab.spectral.assembly import mass_matrix, stiffness_matrix
from holderlab.spectral.eigen import ps_functional
from holderlab.spectral.inertia import inertia

SQ = build_domain({"flat": 1.0})


def test_mesh_area_and_orientation():
    for spec in ({"flat": 1.0}, {"samples": [[0, 0.5], [0.5, 1.0], [1, 0.5]]},
                 {"fractal": {"gamma": 0.75, "m": 8, "n_max": 1, "strict": False}}):
        dom = build_domain(spec)
        mesh = triangulate(dom, 1 / 16)
        assert np.all(mesh.areas() > 0)
        assert mesh.areas().sum() == pytest.approx(dom.area(), rel=1e-12)


def test_stiffness_kernel_and_mass_total():
    mesh = rectangle_mesh(0, 1, 0, 1, 1 / 8)
    K, M = stiffness_matrix(mesh), mass_matrix(mesh)
    one = np.ones(mesh.n_vertices)
    assert np.abs(K @ one).max() < 1e-12
    assert one @ (M @ one) == pytest.approx(1.0)
    x = mesh.vertices[:, 0]
    assert x @ (K @ x) == pytest.approx(1.0)  # ∫|∇x|² over the unit square


def test_unit_square_counts():
    mesh = triangulate(SQ, 1 / 64)
    neu = assemble(mesh, SQ, zero_potential(), 0.0, "neumann")
    dir_ = assemble(mesh, SQ, zero_potential(), 0.0, "dirichlet")
    assert count_below(neu, 50.0) == 8
    assert count_below(dir_, 50.0) == 3


def test_second_eigenvalue_against_dense():
    mesh = triangulate(SQ, 1 / 16)
    op = assemble(mesh, SQ, zero_potential(), 0.0, "neumann")
    dense = eigh(op.stiffness.toarray(), op.mass.toarray(), eigvals_only=True)[:4]
    ours = lowest_eigenvalues(op, 4, tol=1e-10)
    assert np.allclose(ours, dense, rtol=1e-8, atol=1e-8)
    assert ours[1] == pytest.approx(math.pi**2, rel=0.02)


def test_fem_convergence_order():
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        op = assemble(triangulate(SQ, h), SQ, zero_potential(), 0.0, "neumann")
        errs.append(abs(lowest_eigenvalues(op, 2, 1e-10)[1] - math.pi**2) / math.pi**2)
    assert errs[-1] < 0.01
    assert math.log2(errs[1] / errs[2]) >= 1.8


def test_constant_potential_shift():
    # −Δ + λ(−1) on the square: eigenvalues shift by −λ exactly
    mesh = triangulate(SQ, 1 / 32)
    op0 = assemble(mesh, SQ, zero_potential(), 0.0, "neumann")
    op1 = assemble(mesh, SQ, constant_potential(-1.0), 30.0, "neumann")
    assert count_below(op1, 0.0) == count_below(op0, 30.0)


def test_inertia_subadditivity(rng):
    mesh = triangulate(SQ, 1 / 16)
    A = assemble(mesh, SQ, tent_potential(), 200.0, "neumann").shifted(0.0)
    B = assemble(mesh, SQ, constant_potential(-1.0), 40.0, "neumann").potential * 40.0
    lhs = inertia(A + B)[0]
    assert lhs <= inertia(A)[0] + inertia(B)[0]


def test_potential_monotonicity():
    mesh = triangulate(SQ, 1 / 32)
    counts = [count_below(assemble(mesh, SQ, tent_potential(depth=1.0), lam, "neumann"), 0.0)
              for lam in (50, 100, 200, 400)]
    assert counts == sorted(counts)


def test_ps_functional_reduces_to_poincare_at_q2():
    mesh = triangulate(SQ, 1 / 16)
    op = assemble(mesh, SQ, zero_potential(), 0.0, "neumann")
    fg, proj = ps_functional(op, 2.0)
    mu2 = lowest_eigenvalues(op, 2, 1e-10)[1]
    x = mesh.vertices[:, 0]
    # cos(πx) is the eigenfunction; the functional is within FEM error of μ₂
    val, _ = fg(np.cos(math.pi * x))
    assert math.exp(val) == pytest.approx(mu2, rel=0.05)
    assert math.exp(val) >= mu2 * (1 - 1e-9) * 0.999


def test_ps_gradient_matches_finite_differences(rng):
    mesh = triangulate(SQ, 1 / 6)
    op = assemble(mesh, SQ, zero_potential(), 0.0, "neumann")
    fg, proj = ps_functional(op, 6.0)
    z = proj(rng.standard_normal(op.size))
    f0, g = fg(z)
    v = proj(rng.standard_normal(op.size))
    eps = 1e-6
    fd = (fg(z + eps * v)[0] - fg(z - eps * v)[0]) / (2 * eps)
    assert g @ v == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_hat_domain_shape():
    dom = hat_domain(0.25)
    assert dom.x_range == (0.0, 0.125)
    assert dom.f(0.0625) == pytest.approx(0.25 / 3 + 0.125)


@pytest.mark.slow
def test_fine_mesh_square_count():
    op = assemble(triangulate(SQ, 2.0**-9), SQ, zero_potential(), 0.0, "neumann")
    assert count_below(op, 50.0) == 8
