"""Shared test helpers: random polygons and a quadratic patch test."""

import numpy as np
import scipy.sparse as sps

from vem_plate.analysis import ExactSolution, error_discrete_l2, interpolate_dofs
from vem_plate.local_vem import Material
from vem_plate.system import ConstraintSet, LinearSystem, assemble_operators, number_dofs, solve


def random_convex_polygon(rng, n):
    """Polygon through ``n`` sorted random angles on a jittered circle."""
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    while np.min(np.diff(np.r_[ang, ang[0] + 2 * np.pi])) < 0.15:
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = 1.0
    c = rng.uniform(-2, 2, 2)
    return c + r * np.column_stack([np.cos(ang), np.sin(ang)]) * rng.uniform(0.5, 2.0)


def random_star_polygon(rng, n):
    """Star-shaped polygon with radii alternating in size (non-convex)."""
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False) + rng.uniform(-0.1, 0.1, n)
    rad = np.where(np.arange(n) % 2 == 0, 1.0, rng.uniform(0.35, 0.6, n))
    return rng.uniform(-1, 1, 2) + rad[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])


def is_convex(xy):
    d = np.roll(xy, -1, axis=0) - xy
    cross = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
    return bool(np.all(cross > 0))


def polynomial_exact(c):
    """Global quadratic deflection with zero shear strain (so zero load)."""
    a0, a1, a2, a3, a4, a5 = c

    def w(x, y):
        return a0 + a1 * x + a2 * y + a3 * x * x + a4 * x * y + a5 * y * y

    def grad(x, y):
        return np.stack([a1 + 2 * a3 * x + a4 * y, a2 + a4 * x + 2 * a5 * y], axis=-1)

    return ExactSolution(w, grad, grad, lambda x, y: 0 * x, name="quadratic")


def patch_error(mesh, coeffs=(0.3, -0.2, 0.5, 1.0, -0.7, 0.4), mat=Material(t=0.1)):
    """Prescribe all boundary dofs from the interpolant and solve inside."""
    ex = polynomial_exact(coeffs)
    dm = number_dofs(mesh)
    A = assemble_operators(mesh, mat, dm).matrix().tocsr()
    u_ex = interpolate_dofs(ex, mesh, dm)
    bv = np.unique(mesh.edges[mesh.boundary_edges])
    fixed = np.zeros(dm.n_dof, dtype=bool)
    for v in bv:
        fixed[dm.vertex_dofs(v)] = True
    fixed[[dm.edge_dof(e) for e in mesh.boundary_edges]] = True
    free = ~fixed
    u = u_ex.copy()
    rhs = -A[free][:, fixed] @ u_ex[fixed]
    P = sps.identity(dm.n_dof, format="csr")[:, np.flatnonzero(free)]
    sys_ = LinearSystem(A[free][:, free], rhs, A, np.zeros(dm.n_dof), ConstraintSet(P, fixed))
    u[free] = solve(sys_)
    return error_discrete_l2("w", u_ex, u, mesh), np.abs(u - u_ex).max()
