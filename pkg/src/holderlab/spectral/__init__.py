"""P1 finite elements, matrix inertia and eigenvalue counting."""

from .assembly import DiscreteOperator, assemble, mass_matrix, potential_matrix, stiffness_matrix
from .eigen import (CountReport, count_below, count_report, estimate_poincare_constant,
                    estimate_ps_constant, hat_domain, lowest_eigenvalues)
from .inertia import InertiaReport, inertia, inertia_report
from .mesh import Mesh, export_mesh_csv, rectangle_mesh, triangulate

__all__ = [
    "CountReport", "DiscreteOperator", "InertiaReport", "Mesh", "assemble", "count_below",
    "count_report", "estimate_poincare_constant", "estimate_ps_constant", "export_mesh_csv",
    "hat_domain", "inertia", "inertia_report", "lowest_eigenvalues", "mass_matrix",
    "potential_matrix", "rectangle_mesh", "stiffness_matrix", "triangulate",
]
