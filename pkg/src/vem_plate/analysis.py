"""Exact solutions, dof interpolation, error norms and convergence rates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .mesh.core import PolygonMesh
from .quadrature import edge_gauss
from .system import GlobalDofMap, Solution

KINDS = ("w", "grad_w", "theta")


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form fields; every callable takes ``(x, y)`` arrays.

    ``grad_w`` and ``theta`` return arrays of shape ``(..., 2)``. ``theta`` may
    be None for references that only provide the deflection.
    """

    w: Callable
    grad_w: Callable
    theta: Callable | None
    g: Callable
    name: str = ""

    def gamma(self, x, y):
        return self.theta(x, y) - self.grad_w(x, y)


def test1_exact(t: float, E: float = 1.0, nu: float = 0.0) -> ExactSolution:
    """Manufactured clamped-square solution with a thickness correction term."""
    if t <= 0:
        raise ValueError("thickness must be positive")
    c = 2.0 * t * t / (5.0 * (1.0 - nu))
    D = E / (12.0 * (1.0 - nu * nu))

    def parts(s):
        S = s * (s - 1.0)
        return S, 2.0 * s - 1.0, S * (5.0 * S + 1.0), 10.0 * S + 1.0

    def w(x, y):
        X, _, Qx, _ = parts(np.asarray(x, float))
        Y, _, Qy, _ = parts(np.asarray(y, float))
        return X**3 * Y**3 / 3.0 - c * (Y**3 * Qx + X**3 * Qy)

    def grad_w(x, y):
        X, dX, Qx, dQx = parts(np.asarray(x, float))
        Y, dY, Qy, dQy = parts(np.asarray(y, float))
        wx = X**2 * dX * Y**3 - c * (Y**3 * dQx * dX + 3.0 * X**2 * dX * Qy)
        wy = X**3 * Y**2 * dY - c * (X**3 * dQy * dY + 3.0 * Y**2 * dY * Qx)
        return np.stack([wx, wy], axis=-1)

    def theta(x, y):
        X, dX, _, _ = parts(np.asarray(x, float))
        Y, dY, _, _ = parts(np.asarray(y, float))
        return np.stack([Y**3 * X**2 * dX, X**3 * Y**2 * dY], axis=-1)

    def g(x, y):
        X, _, _, _ = parts(np.asarray(x, float))
        Y, _, _, _ = parts(np.asarray(y, float))
        px, py = 5.0 * X + 1.0, 5.0 * Y + 1.0
        return D * 12.0 * (Y * px * (2.0 * Y**2 + X * py) + X * py * (2.0 * X**2 + Y * px))

    return ExactSolution(w, grad_w, theta, g, name="test1")


def test2_kirchhoff(a: float = 1.0, b: float = 2.0, E: float = 1.0, nu: float = 0.3) -> ExactSolution:
    """Thin-plate limit of a simply supported rectangle under a sine load."""
    if a <= 0 or b <= 0:
        raise ValueError("side lengths must be positive")
    amp = 12.0 * (1.0 - nu * nu) / E / (np.pi**4 * (1.0 / a**2 + 1.0 / b**2) ** 2)
    ka, kb = np.pi / a, np.pi / b

    def w(x, y):
        return amp * np.sin(ka * np.asarray(x, float)) * np.sin(kb * np.asarray(y, float))

    def grad_w(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return amp * np.stack(
            [ka * np.cos(ka * x) * np.sin(kb * y), kb * np.sin(ka * x) * np.cos(kb * y)], axis=-1
        )

    def g(x, y):
        return np.sin(ka * np.asarray(x, float)) * np.sin(kb * np.asarray(y, float))

    return ExactSolution(w, grad_w, None, g, name="kirchhoff")


def interpolate_dofs(exact: ExactSolution, mesh: PolygonMesh, dofmap: GlobalDofMap) -> np.ndarray:
    """Degrees of freedom of the exact fields: vertex samples plus edge means
    of the tangential shear strain (3-point Gauss)."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    out = np.zeros(dofmap.n_dof)
    vert = out[: 5 * mesh.n_vertices].reshape(-1, 5)
    vert[:, 0] = exact.w(x, y)
    gw = exact.grad_w(x, y)
    vert[:, 1:3] = gw
    if exact.theta is not None:
        vert[:, 3:5] = exact.theta(x, y) - gw
        u, wts = edge_gauss(3)
        a = mesh.vertices[mesh.edges[:, 0]]
        d = mesh.vertices[mesh.edges[:, 1]] - a
        pts = a[:, None, :] + u[None, :, None] * d[:, None, :]
        gam = exact.gamma(pts[..., 0], pts[..., 1])
        t = d / np.linalg.norm(d, axis=1)[:, None]
        out[5 * mesh.n_vertices :] = np.einsum("eqk,ek,q->e", gam, t, wts)
    return out


def _vertex_field(dofs: np.ndarray, n_vertices: int, kind: str) -> np.ndarray:
    vert = np.asarray(dofs, float)[: 5 * n_vertices].reshape(-1, 5)
    if kind == "w":
        return vert[:, :1]
    if kind == "grad_w":
        return vert[:, 1:3]
    if kind == "theta":
        return vert[:, 1:3] + vert[:, 3:5]
    raise ValueError(f"unknown error kind {kind!r}; expected one of {KINDS}")


def _dofs(v) -> np.ndarray:
    return v.dofs if isinstance(v, Solution) else np.asarray(v, float)


def error_discrete_l2(kind: str, exact_dofs, solution, mesh: PolygonMesh) -> float:
    """Relative vertex-based error; each vertex enters once per incident cell,
    weighted by that cell's area."""
    nv = mesh.n_vertices
    ex = _vertex_field(_dofs(exact_dofs), nv, kind)
    ap = _vertex_field(_dofs(solution), nv, kind)
    ids = np.concatenate(mesh.cells)
    wts = np.repeat(mesh.cell_areas(), [len(c) for c in mesh.cells])
    num = np.sum(wts * np.sum((ex - ap)[ids] ** 2, axis=1))
    den = np.sum(wts * np.sum(ex[ids] ** 2, axis=1))
    if den == 0.0:
        raise ZeroDivisionError("exact field vanishes at every vertex")
    return float(np.sqrt(num / den))


def energy_error(exact_dofs, solution, A_full) -> float:
    """Relative energy error of dof vectors measured by the unconstrained
    assembled matrix."""
    e = _dofs(exact_dofs)
    d = e - _dofs(solution)
    den = float(e @ (A_full @ e))
    if den <= 0.0:
        raise ZeroDivisionError("exact dofs have zero energy")
    return float(np.sqrt(max(float(d @ (A_full @ d)), 0.0) / den))


@dataclass(frozen=True)
class ErrorReport:
    e_w: float
    e_grad_w: float
    e_theta: float
    energy: float
    h: float
    n_dof: int
    t: float


def error_report(exact_dofs, solution, mesh, A_full, t, kinds=KINDS) -> ErrorReport:
    vals = {k: error_discrete_l2(k, exact_dofs, solution, mesh) if k in kinds else float("nan") for k in KINDS}
    return ErrorReport(
        e_w=vals["w"],
        e_grad_w=vals["grad_w"],
        e_theta=vals["theta"],
        energy=energy_error(exact_dofs, solution, A_full) if A_full is not None else float("nan"),
        h=mesh.h,
        n_dof=5 * mesh.n_vertices + mesh.n_edges,
        t=t,
    )


def _slope(h, e) -> float:
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


@dataclass
class RateTable:
    h: np.ndarray
    errors: dict = field(default_factory=dict)

    def order(self, kind: str) -> float:
        """Least-squares slope of log(error) against log(h)."""
        return _slope(self.h, self.errors[kind])

    def pairwise(self, kind: str) -> np.ndarray:
        e = self.errors[kind]
        return np.log(e[:-1] / e[1:]) / np.log(self.h[:-1] / self.h[1:])

    @property
    def orders(self) -> dict:
        return {k: self.order(k) for k in self.errors}


def convergence_rates(h, errors: Mapping | np.ndarray) -> RateTable:
    h = np.asarray(h, float)
    if not isinstance(errors, Mapping):
        errors = {"error": errors}
    errs = {k: np.asarray(v, float) for k, v in errors.items()}
    if len(h) < 2:
        raise ValueError("need at least two refinement levels")
    for k, v in errs.items():
        if v.shape != h.shape:
            raise ValueError(f"{k}: {len(v)} errors for {len(h)} mesh sizes")
        if np.any(v <= 0):
            raise ValueError(f"{k}: errors must be positive")
    return RateTable(h, errs)


def corner_value(solution, mesh: PolygonMesh, point, tol: float = 1e-10) -> float:
    """Deflection at the mesh vertex located at ``point``."""
    v = mesh.find_vertex(point, tol)
    return float(_dofs(solution)[5 * v])
