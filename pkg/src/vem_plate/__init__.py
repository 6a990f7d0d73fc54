"""Conforming virtual elements for Reissner-Mindlin plates.

The unknowns are the deflection ``w`` (a C1 virtual space with value and
gradient dofs at vertices) and the shear strain ``gamma = theta - grad w``
(vertex values plus tangential edge means). Rotations are recovered as
``theta = grad w + gamma``.
"""

from .analysis import (
    ErrorReport,
    ExactSolution,
    RateTable,
    convergence_rates,
    corner_value,
    energy_error,
    error_discrete_l2,
    error_report,
    interpolate_dofs,
    test1_exact,
    test2_kirchhoff,
)
from .local_vem import Material, Stabilization, local_system, pi_eps, pi_zero
from .mesh import PolygonMesh, Tag, build_mesh, generate_mesh, read_mesh, write_mesh
from .system import (
    SolverError,
    assemble,
    build_constraints,
    expand_solution,
    number_dofs,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ErrorReport",
    "ExactSolution",
    "Material",
    "PolygonMesh",
    "RateTable",
    "SolverError",
    "Stabilization",
    "Tag",
    "assemble",
    "build_constraints",
    "build_mesh",
    "convergence_rates",
    "corner_value",
    "energy_error",
    "error_discrete_l2",
    "error_report",
    "expand_solution",
    "generate_mesh",
    "interpolate_dofs",
    "local_system",
    "number_dofs",
    "pi_eps",
    "pi_zero",
    "read_mesh",
    "solve",
    "test1_exact",
    "test2_kirchhoff",
    "write_mesh",
]
