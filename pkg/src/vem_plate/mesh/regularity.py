"""Shape-regularity diagnostics (short edges, star-shapedness w.r.t. a ball)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import ElementGeometry, PolygonMesh


@dataclass
class RegularityReport:
    edge_ratio: np.ndarray
    ball_ratio: np.ndarray
    ball_center: np.ndarray
    threshold: float

    @property
    def min_edge_ratio(self) -> float:
        return float(self.edge_ratio.min())

    @property
    def min_ball_ratio(self) -> float:
        return float(self.ball_ratio.min())

    @property
    def flagged(self) -> np.ndarray:
        """Cells whose edge or ball ratio falls below ``threshold``."""
        return np.flatnonzero((self.edge_ratio < self.threshold) | (self.ball_ratio < self.threshold))


def kernel_ball(geom: ElementGeometry):
    """Largest disc inside the kernel of a polygon.

    The kernel (the set of points the polygon is star-shaped about) is the
    intersection of the inner half-planes of all edges, so its Chebyshev
    centre solves a 3-variable linear program. Works for non-convex cells;
    returns radius 0 when the kernel is empty.
    """
    n = geom.normals
    p = geom.vertices
    # n_e . x + r <= n_e . p_e for every edge
    A = np.column_stack([n, np.ones(len(n))])
    rhs = np.einsum("ij,ij->i", n, p)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A, b_ub=rhs, bounds=[(None, None), (None, None), (0, None)])
    if res.status != 0:
        return np.full(2, np.nan), 0.0
    return res.x[:2], float(res.x[2])


def check_regularity(mesh: PolygonMesh, threshold: float = 1e-2) -> RegularityReport:
    nc = mesh.n_cells
    edge_ratio = np.empty(nc)
    ball_ratio = np.empty(nc)
    centers = np.empty((nc, 2))
    for c in range(nc):
        g = ElementGeometry.from_vertices(mesh.cell_vertices(c), cell_id=c)
        edge_ratio[c] = g.edge_lengths.min() / g.diameter
        centers[c], r = kernel_ball(g)
        ball_ratio[c] = r / g.diameter
    return RegularityReport(edge_ratio, ball_ratio, centers, threshold)
