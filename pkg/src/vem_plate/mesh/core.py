"""Polygonal mesh container, construction and per-element geometry."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree


class MeshError(ValueError):
    """Raised for invalid mesh input (topology or geometry)."""


class DegenerateElementError(MeshError):
    pass


class Tag(str, enum.Enum):
    """Boundary condition carried by a boundary edge."""

    CLAMPED = "C"
    SIMPLY_SUPPORTED = "S"
    FREE = "F"


TagRule = Union[Tag, Callable[[np.ndarray], Tag]]


@dataclass(frozen=True, eq=False)
class PolygonMesh:
    """Immutable polygonal mesh.

    Edges are stored with a canonical direction from the lower to the higher
    vertex index. ``cell_edge_signs[c][j]`` is +1 when the counterclockwise
    cycle of cell ``c`` runs along its ``j``-th edge in the canonical
    direction and -1 otherwise. ``edge_cells[e]`` holds the (at most two)
    incident cells, padded with -1.
    """

    vertices: np.ndarray
    cells: tuple
    edges: np.ndarray
    cell_edges: tuple
    cell_edge_signs: tuple
    edge_cells: np.ndarray
    boundary_tags: Mapping[int, Tag] = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_cells[:, 1] < 0)

    def cell_vertices(self, c: int) -> np.ndarray:
        return self.vertices[self.cells[c]]

    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])

    def cell_areas(self) -> np.ndarray:
        return np.array([_shoelace(self.vertices[c]) for c in self.cells])

    @property
    def h(self) -> float:
        """Mesh label: the largest element diameter."""
        return max(_diameter(self.vertices[c]) for c in self.cells)

    def find_vertex(self, point, tol: float = 1e-10) -> int:
        d = np.linalg.norm(self.vertices - np.asarray(point, dtype=float), axis=1)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise MeshError(f"point {tuple(point)} is not a mesh vertex")
        return i

    def __eq__(self, other):
        if not isinstance(other, PolygonMesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and len(self.cells) == len(other.cells)
            and all(np.array_equal(a, b) for a, b in zip(self.cells, other.cells))
            and dict(self.boundary_tags) == dict(other.boundary_tags)
        )

    __hash__ = None


@dataclass(frozen=True)
class ElementGeometry:
    """Geometric data of one polygon, vertices in counterclockwise order.

    Edge ``j`` runs from vertex ``j`` to vertex ``j+1`` (cyclically); its
    tangent follows the counterclockwise cycle and its normal points out.
    """

    vertices: np.ndarray
    area: float
    centroid: np.ndarray
    diameter: float
    edge_lengths: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    cell_id: int | None = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge_endpoints(self, j: int):
        return self.vertices[j], self.vertices[(j + 1) % self.n]

    @classmethod
    def from_vertices(cls, xy, cell_id: int | None = None) -> "ElementGeometry":
        xy = np.asarray(xy, dtype=float)
        x, y = xy[:, 0], xy[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        area = 0.5 * cross.sum()
        if not area > 0.0:
            where = "" if cell_id is None else f" (cell {cell_id})"
            raise DegenerateElementError(f"element has non-positive area {area:.3e}{where}")
        cx = ((x + xn) * cross).sum() / (6.0 * area)
        cy = ((y + yn) * cross).sum() / (6.0 * area)
        d = np.stack([xn - x, yn - y], axis=1)
        lengths = np.hypot(d[:, 0], d[:, 1])
        if np.any(lengths == 0.0):
            raise DegenerateElementError(f"zero-length edge in cell {cell_id}")
        tangents = d / lengths[:, None]
        normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
        return cls(
            vertices=xy,
            area=float(area),
            centroid=np.array([cx, cy]),
            diameter=_diameter(xy),
            edge_lengths=lengths,
            tangents=tangents,
            normals=normals,
            cell_id=cell_id,
        )


def _shoelace(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _diameter(xy: np.ndarray) -> float:
    diff = xy[:, None, :] - xy[None, :, :]
    return float(np.sqrt((diff**2).sum(-1).max()))


def element_geometry(mesh: PolygonMesh, cell_id: int) -> ElementGeometry:
    return ElementGeometry.from_vertices(mesh.cell_vertices(cell_id), cell_id=cell_id)


def _segments_cross(p1, p2, q1, q2, eps):
    """Vectorised closed-segment intersection test (touching counts)."""

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (
            c[..., 0] - a[..., 0]
        )

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 <= eps) & (d3 * d4 <= eps)


def _check_simple(vertices: np.ndarray, cells: Sequence[np.ndarray], scale: float) -> None:
    by_size: dict[int, list[int]] = {}
    for c, cyc in enumerate(cells):
        by_size.setdefault(len(cyc), []).append(c)
    for n, ids in by_size.items():
        if n < 4:
            continue
        pairs = [(i, j) for i in range(n) for j in range(i + 2, n) if not (i == 0 and j == n - 1)]
        if not pairs:
            continue
        idx = np.array([cells[c] for c in ids])
        xy = vertices[idx]
        nxt = np.roll(xy, -1, axis=1)
        pi = np.array([p[0] for p in pairs])
        pj = np.array([p[1] for p in pairs])
        hit = _segments_cross(xy[:, pi], nxt[:, pi], xy[:, pj], nxt[:, pj], -1e-14 * scale**4)
        bad = np.flatnonzero(hit.any(axis=1))
        if bad.size:
            raise MeshError(f"cell {ids[bad[0]]} is self-intersecting")


def _resolve_rule(rule: TagRule) -> Callable[[np.ndarray], Tag]:
    if isinstance(rule, Tag):
        return lambda _mid: rule
    if isinstance(rule, str):
        tag = Tag(rule)
        return lambda _mid: tag
    return rule


def build_mesh(vertices, cells, boundary_tag_rule: TagRule = Tag.CLAMPED) -> PolygonMesh:
    """Build a validated mesh.

    ``boundary_tag_rule`` is either a single :class:`Tag` for the whole
    boundary or a callable mapping an edge midpoint ``(x, y)`` to a tag.
    Clockwise cells are reoriented.
    """
    rule = _resolve_rule(boundary_tag_rule)
    return _build(vertices, cells, lambda a, b, mid: rule(mid))


def build_mesh_with_tags(vertices, cells, tags: Mapping[tuple, Tag]) -> PolygonMesh:
    """Build a mesh whose boundary tags are given per vertex pair ``(i, j)``."""
    table = {tuple(sorted(k)): Tag(v) for k, v in tags.items()}

    def lookup(a, b, mid):
        try:
            return table[(a, b)]
        except KeyError:
            raise MeshError(f"boundary edge ({a}, {b}) carries no tag") from None

    return _build(vertices, cells, lookup)


def _build(vertices, cells, tag_of) -> PolygonMesh:
    xy = np.array(vertices, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise MeshError("vertices must be an (N, 2) array")
    nv = len(xy)
    span = xy.max(axis=0) - xy.min(axis=0) if nv else np.zeros(2)
    scale = float(np.hypot(*span)) or 1.0

    pairs = cKDTree(xy).query_pairs(1e-12 * scale)
    if pairs:
        i, j = sorted(min(pairs))
        raise MeshError(f"duplicate vertices {i} and {j}")

    cyc_list = []
    for c, cyc in enumerate(cells):
        cyc = np.asarray(cyc, dtype=np.int64)
        if cyc.ndim != 1 or len(cyc) < 3:
            raise MeshError(f"cell {c} has fewer than 3 vertices")
        if cyc.min() < 0 or cyc.max() >= nv:
            raise MeshError(f"cell {c} references a vertex out of range")
        if len(np.unique(cyc)) != len(cyc):
            raise MeshError(f"cell {c} repeats a vertex")
        a = _shoelace(xy[cyc])
        if a == 0.0:
            raise DegenerateElementError(f"cell {c} has zero area")
        if a < 0.0:
            cyc = cyc[::-1].copy()
        cyc_list.append(cyc)
    _check_simple(xy, cyc_list, scale)

    edge_index: dict[tuple, int] = {}
    edges = []
    edge_cells = []
    used = {}
    cell_edges, cell_signs = [], []
    for c, cyc in enumerate(cyc_list):
        nxt = np.roll(cyc, -1)
        ce = np.empty(len(cyc), dtype=np.int64)
        cs = np.empty(len(cyc), dtype=np.int64)
        for k, (a, b) in enumerate(zip(cyc.tolist(), nxt.tolist())):
            if (a, b) in used:
                raise MeshError(
                    f"edge ({a}, {b}) traversed twice in the same direction (cells {used[(a, b)]}, {c})"
                )
            used[(a, b)] = c
            key = (a, b) if a < b else (b, a)
            e = edge_index.get(key)
            if e is None:
                e = len(edges)
                edge_index[key] = e
                edges.append(key)
                edge_cells.append([c, -1])
            else:
                if edge_cells[e][1] >= 0:
                    raise MeshError(f"non-manifold edge {key} shared by more than two cells")
                edge_cells[e][1] = c
            ce[k] = e
            cs[k] = 1 if a < b else -1
        cell_edges.append(ce)
        cell_signs.append(cs)

    edges_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    ec = np.array(edge_cells, dtype=np.int64).reshape(-1, 2)
    tags = {}
    for e in np.flatnonzero(ec[:, 1] < 0):
        a, b = edges_arr[e]
        mid = 0.5 * (xy[a] + xy[b])
        tags[int(e)] = Tag(tag_of(int(a), int(b), mid))

    return PolygonMesh(
        vertices=xy,
        cells=tuple(cyc_list),
        edges=edges_arr,
        cell_edges=tuple(cell_edges),
        cell_edge_signs=tuple(cell_signs),
        edge_cells=ec,
        boundary_tags=tags,
    )
