"""Global dof numbering, boundary constraints, assembly and the linear solve.

Global numbering: vertex ``v`` owns ``5v + (0..4)`` = ``(w, w_x, w_y, gamma_x,
gamma_y)``; edge ``e`` owns ``5*Nv + e``, the tangential mean of gamma along
the canonical direction (lower to higher vertex index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .local_vem import DEFAULT_STABILIZATION, Material, Stabilization, local_load, local_system
from .mesh.core import ElementGeometry, PolygonMesh, Tag

W, WX, WY, GX, GY = range(5)


class SolverError(RuntimeError):
    """The reduced system could not be solved to the required accuracy."""


@dataclass(frozen=True)
class GlobalDofMap:
    n_vertices: int
    n_edges: int
    cell_dofs: tuple
    cell_signs: tuple

    @property
    def n_dof(self) -> int:
        return 5 * self.n_vertices + self.n_edges

    def vertex_dofs(self, v: int) -> np.ndarray:
        return 5 * v + np.arange(5)

    def edge_dof(self, e: int) -> int:
        return 5 * self.n_vertices + e


def number_dofs(mesh: PolygonMesh) -> GlobalDofMap:
    """Gather tables from local combined (W, V) layouts to global dofs.

    The edge dof is orientation-odd, so the gather sign is -1 where the cell
    runs against the canonical edge direction.
    """
    nv = mesh.n_vertices
    dofs, signs = [], []
    for c, cyc in enumerate(mesh.cells):
        n = len(cyc)
        base = 5 * cyc[:, None]
        idx = np.concatenate(
            [
                5 * cyc,
                (base + [WX, WY]).ravel(),
                (base + [GX, GY]).ravel(),
                5 * nv + mesh.cell_edges[c],
            ]
        )
        s = np.ones(6 * n)
        s[5 * n :] = mesh.cell_edge_signs[c]
        dofs.append(idx)
        signs.append(s)
    return GlobalDofMap(nv, mesh.n_edges, tuple(dofs), tuple(signs))


@dataclass(frozen=True)
class ConstraintSet:
    """Homogeneous essential conditions as a prolongation ``u = P u_free``."""

    P: sps.csr_matrix
    constrained: np.ndarray

    @property
    def n_free(self) -> int:
        return self.P.shape[1]

    @property
    def n_dof(self) -> int:
        return self.P.shape[0]

    @property
    def n_eliminated(self) -> int:
        """Unknowns removed by the constraints (``n_dof - n_free``)."""
        return self.n_dof - self.n_free


def build_constraints(mesh: PolygonMesh, dofmap: GlobalDofMap) -> ConstraintSet:
    """Discrete version of ``w = 0`` on clamped/supported edges and
    ``grad w + gamma = 0`` on clamped edges.

    On a supported edge the cubic trace of ``w`` vanishes iff ``w`` and its
    tangential derivative vanish at both endpoints. On a clamped edge the
    vertex shear strains equal ``-grad w`` and the edge mean is zero.
    """
    nv = mesh.n_vertices
    tangents = [[] for _ in range(nv)]
    supported = np.zeros(nv, dtype=bool)
    clamped = np.zeros(nv, dtype=bool)
    clamped_edge = np.zeros(mesh.n_edges, dtype=bool)
    for e, tag in mesh.boundary_tags.items():
        if tag is Tag.FREE:
            continue
        a, b = mesh.edges[e]
        d = mesh.vertices[b] - mesh.vertices[a]
        t = d / np.hypot(*d)
        for v in (a, b):
            tangents[v].append(t)
            supported[v] = True
            if tag is Tag.CLAMPED:
                clamped[v] = True
        if tag is Tag.CLAMPED:
            clamped_edge[e] = True

    rows, cols, vals = [], [], []
    col = 0

    def add(entries):
        nonlocal col
        for r, val in entries:
            if val != 0.0:
                rows.append(r)
                cols.append(col)
                vals.append(val)
        col += 1

    for v in range(nv):
        base = 5 * v
        if not supported[v]:
            add([(base + W, 1.0)])
        T = np.array(tangents[v]).reshape(-1, 2)
        rank = 0 if len(T) == 0 else int(np.linalg.matrix_rank(T, tol=1e-8))
        if rank == 0:
            free_dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        elif rank == 1:
            t = T[0]
            free_dirs = [np.array([-t[1], t[0]])]
        else:
            free_dirs = []
        for d in free_dirs:
            entries = [(base + WX, d[0]), (base + WY, d[1])]
            if clamped[v]:
                entries += [(base + GX, -d[0]), (base + GY, -d[1])]
            add(entries)
        if not clamped[v]:
            add([(base + GX, 1.0)])
            add([(base + GY, 1.0)])
    for e in range(mesh.n_edges):
        if not clamped_edge[e]:
            add([(dofmap.edge_dof(e), 1.0)])

    P = sps.csr_matrix((vals, (rows, cols)), shape=(dofmap.n_dof, col))
    P.sort_indices()
    # a dof is "constrained" unless it is the sole entry of its own column
    free_self = np.zeros(dofmap.n_dof, dtype=bool)
    Pc = P.tocsc()
    for j in range(col):
        lo, hi = Pc.indptr[j], Pc.indptr[j + 1]
        if hi - lo == 1 and Pc.data[lo] == 1.0:
            free_self[Pc.indices[lo]] = True
    return ConstraintSet(P=P, constrained=~free_self)


@dataclass
class AssembledOperators:
    """Unconstrained global matrices; the shear part is stored for ``t``."""

    K_bending: sps.csr_matrix
    K_shear: sps.csr_matrix
    t: float

    def matrix(self, t: float | None = None) -> sps.csr_matrix:
        if t is None or t == self.t:
            return (self.K_bending + self.K_shear).tocsr()
        return (self.K_bending + (self.t / t) ** 2 * self.K_shear).tocsr()


def element_geometries(mesh: PolygonMesh) -> list:
    return [ElementGeometry.from_vertices(mesh.cell_vertices(c), cell_id=c) for c in range(mesh.n_cells)]


def _shape_key(geom: ElementGeometry) -> bytes:
    # local matrices are translation invariant; structured meshes repeat a
    # handful of shapes, so cache on the vertex offsets (rounded at 1e-12 h)
    rel = (geom.vertices - geom.vertices[0]) / geom.diameter
    return np.round(rel, 12).tobytes() + f"{geom.diameter:.12e}".encode()


def assemble_operators(
    mesh: PolygonMesh,
    material: Material,
    dofmap: GlobalDofMap,
    geoms=None,
    stabilization: Stabilization = DEFAULT_STABILIZATION,
):
    """Unconstrained bending and shear matrices (COO triplets summed into CSR)."""
    geoms = geoms or element_geometries(mesh)
    rows, cols, vb, vs = [], [], [], []
    cache = {}
    for c, g in enumerate(geoms):
        key = _shape_key(g)
        loc = cache.get(key)
        if loc is None:
            loc = cache[key] = local_system(g, material, stabilization)
        idx, s = dofmap.cell_dofs[c], dofmap.cell_signs[c]
        ss = np.outer(s, s)
        m = len(idx)
        rows.append(np.repeat(idx, m))
        cols.append(np.tile(idx, m))
        vb.append((loc.K_bending * ss).ravel())
        vs.append((loc.K_shear * ss).ravel())
    shape = (dofmap.n_dof, dofmap.n_dof)
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    cl = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
    Kb = sps.csr_matrix((np.concatenate(vb) if vb else [], (r, cl)), shape=shape)
    Ks = sps.csr_matrix((np.concatenate(vs) if vs else [], (r, cl)), shape=shape)
    return AssembledOperators(Kb, Ks, material.t)


def assemble_load(mesh: PolygonMesh, g: Callable, dofmap: GlobalDofMap, geoms=None) -> np.ndarray:
    geoms = geoms or element_geometries(mesh)
    f = np.zeros(dofmap.n_dof)
    for c, geom in enumerate(geoms):
        fl = local_load(geom, g)
        n = geom.n
        # the load only touches the value dofs, which carry no sign
        np.add.at(f, dofmap.cell_dofs[c][:n], fl[:n])
    return f


@dataclass
class LinearSystem:
    A: sps.csr_matrix
    f: np.ndarray
    A_full: sps.csr_matrix
    f_full: np.ndarray
    constraints: ConstraintSet


def reduce_system(A_full, f_full, constraints: ConstraintSet) -> LinearSystem:
    P = constraints.P
    A = (P.T @ A_full @ P).tocsr()
    A = (0.5 * (A + A.T)).tocsr()
    A.sort_indices()
    return LinearSystem(A, P.T @ f_full, A_full, f_full, constraints)


def assemble(
    mesh, material, g, dofmap, constraints, geoms=None, stabilization: Stabilization = DEFAULT_STABILIZATION
) -> LinearSystem:
    geoms = geoms or element_geometries(mesh)
    ops = assemble_operators(mesh, material, dofmap, geoms, stabilization)
    f = assemble_load(mesh, g, dofmap, geoms)
    return reduce_system(ops.matrix(), f, constraints)


def solve(system: LinearSystem, rtol: float = 1e-8) -> np.ndarray:
    """Sparse symmetric direct solve with Jacobi equilibration.

    Raises :class:`SolverError` on a non-positive pivot (the reduced matrix
    must be SPD) or when the relative residual exceeds ``rtol``.
    """
    A, f = system.A, np.asarray(system.f, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverError("reduced matrix has a non-positive diagonal entry")
    s = 1.0 / np.sqrt(d)
    As = sps.diags(s) @ A @ sps.diags(s)
    try:
        lu = splu(
            As.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    if np.any(lu.U.diagonal() <= 0):
        raise SolverError("matrix is not positive definite (non-positive pivot)")
    u = s * lu.solve(s * f)
    res = np.linalg.norm(A @ u - f)
    nf = np.linalg.norm(f)
    if nf == 0.0:
        if res > 0.0:
            raise SolverError("non-zero residual for a zero right-hand side")
    elif res > rtol * nf:
        raise SolverError(f"relative residual {res / nf:.2e} exceeds {rtol:.0e}")
    return u


@dataclass(frozen=True)
class Solution:
    dofs: np.ndarray
    n_vertices: int

    def _vertex(self, comps) -> np.ndarray:
        return self.dofs[: 5 * self.n_vertices].reshape(-1, 5)[:, comps]

    @property
    def w(self) -> np.ndarray:
        return self._vertex(W)

    @property
    def grad_w(self) -> np.ndarray:
        return self._vertex([WX, WY])

    @property
    def gamma(self) -> np.ndarray:
        return self._vertex([GX, GY])

    @property
    def theta(self) -> np.ndarray:
        """Rotations recovered at the vertices as ``grad w + gamma``."""
        return self.grad_w + self.gamma

    @property
    def edge_means(self) -> np.ndarray:
        return self.dofs[5 * self.n_vertices :]


def expand_solution(reduced, constraints: ConstraintSet, dofmap: GlobalDofMap) -> Solution:
    full = constraints.P @ np.asarray(reduced, dtype=float)
    return Solution(full, dofmap.n_vertices)
