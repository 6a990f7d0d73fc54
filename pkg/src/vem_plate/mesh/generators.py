"""Mesh families used by the plate experiments.

=====  ==========================================================
T1     uniform grid, every square split into two triangles
T2     congruent trapezoids (zigzag pattern)
T3     T1 with displaced edge midpoints (hexagons, non-convex)
T4     regular hexagons clipped to a rectangle
T5     Lloyd-relaxed Voronoi cells clipped to a rectangle
T6     uniform squares on the L-shape (0,1)^2 minus [0.5,1)^2
T7     T6 (n=8) with ``n`` corner refinements at (0.5, 0.5)
=====  ==========================================================
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Voronoi

from .core import (
    MeshError,
    PolygonMesh,
    Tag,
    TagRule,
    _segments_cross,
    _shoelace,
    build_mesh,
    build_mesh_with_tags,
)

FAMILIES = ("T1", "T2", "T3", "T4", "T5", "T6", "T7")

_ALIASES = {
    "uniform-triangles": "T1",
    "trapezoids": "T2",
    "split-random-triangles": "T3",
    "hexagons": "T4",
    "voronoi": "T5",
    "lshape-squares": "T6",
    "lshape-corner-refined": "T7",
}

LSHAPE_CORNER = (0.5, 0.5)


def lshape_plate_tags(mid) -> Tag:
    """Clamped on the outer sides of the L-shape, free on the re-entrant ones."""
    x, y = mid
    tol = 1e-12
    if abs(x) < tol or abs(x - 1) < tol or abs(y) < tol or abs(y - 1) < tol:
        return Tag.CLAMPED
    return Tag.FREE


def generate_mesh(
    family: str,
    n: int,
    domain_params: dict | None = None,
    seed: int | None = None,
    boundary: TagRule | None = None,
) -> PolygonMesh:
    """Generate a mesh of the given family.

    Parameters
    ----------
    family : str
        ``"T1"`` ... ``"T7"`` or one of the long names
        (``"uniform-triangles"``, ``"voronoi"``, ...).
    n : int
        Subdivision parameter. For T1-T4 it is the number of cells per unit
        length along x; for T5 the number of Voronoi seeds; for T6 the
        number of squares per side of each of the three unit-half squares;
        for T7 the number of corner refinements applied to T6 with n=8.
    domain_params : dict, optional
        ``{"a": width, "b": height}`` for the rectangular families
        (default unit square). Ignored by T6/T7.
    seed : int, optional
        Required by T3 and T5.
    boundary : Tag or callable, optional
        Boundary tag rule. Defaults to the L-shape plate rule for T6/T7 and
        to clamped otherwise.
    """
    fam = _ALIASES.get(family, family)
    if fam not in FAMILIES:
        raise ValueError(f"unknown mesh family {family!r}")
    if fam == "T7":
        if n < 0:
            raise ValueError("number of refinements must be >= 0")
    elif n < 1:
        raise ValueError("n must be >= 1")
    if fam in ("T3", "T5") and seed is None:
        raise ValueError(f"family {fam} needs a seed")
    params = {"a": 1.0, "b": 1.0}
    params.update(domain_params or {})
    a, b = float(params["a"]), float(params["b"])
    if boundary is None:
        boundary = lshape_plate_tags if fam in ("T6", "T7") else Tag.CLAMPED

    if fam == "T1":
        verts, cells = _triangles(n, a, b)
    elif fam == "T2":
        verts, cells = _trapezoids(n, a, b)
    elif fam == "T3":
        verts, cells = _split_random_triangles(n, a, b, seed)
    elif fam == "T4":
        verts, cells = _hexagons(n, a, b)
    elif fam == "T5":
        verts, cells = _voronoi(n, a, b, seed)
    elif fam == "T6":
        verts, cells = _lshape_squares(n)
    else:
        mesh = generate_mesh("T6", 8, boundary=boundary)
        for _ in range(n):
            mesh = refine_corner(mesh, LSHAPE_CORNER)
        return mesh
    return build_mesh(verts, cells, boundary)


def _grid_counts(n, a, b):
    nx = max(1, int(round(n * a)))
    ny = max(1, int(round(n * b)))
    return nx, ny


def _triangles(n, a, b):
    nx, ny = _grid_counts(n, a, b)
    xs = np.linspace(0.0, a, nx + 1)
    ys = np.linspace(0.0, b, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    cells = []
    for j in range(ny):
        for i in range(nx):
            v0 = j * (nx + 1) + i
            v1, v2, v3 = v0 + 1, v0 + nx + 2, v0 + nx + 1
            cells.append([v0, v1, v2])
            cells.append([v0, v2, v3])
    return verts, cells


def _trapezoids(n, a, b):
    # each column of width a/n holds n trapezoids stacked alternately; they
    # are similar to the quadrilateral (0,0),(1/2,0),(1/2,2/3),(0,1/3)
    if n % 2:
        raise ValueError("T2 needs an even n")
    nx, ny = _grid_counts(n, a, b)
    xs = np.linspace(0.0, a, nx + 1)
    dy = b / ny
    zig = np.where(np.arange(nx + 1) % 2 == 0, 2.0 / 3.0, 4.0 / 3.0) * dy
    index = {}
    verts = []

    def vid(i, k):
        # k even: horizontal line y = k*dy; k odd: zigzag line above row k-1
        key = (i, k)
        if key not in index:
            y = (k - 1) * dy + zig[i] if k % 2 else k * dy
            index[key] = len(verts)
            verts.append((xs[i], y))
        return index[key]

    cells = []
    for i in range(nx):
        for p in range(0, ny, 2):
            cells.append([vid(i, p), vid(i + 1, p), vid(i + 1, p + 1), vid(i, p + 1)])
            cells.append([vid(i, p + 1), vid(i + 1, p + 1), vid(i + 1, p + 2), vid(i, p + 2)])
    return np.array(verts), cells


def _split_random_triangles(n, a, b, seed, amplitude=0.2, max_rounds=200):
    verts, tris = _triangles(n, a, b)
    rng = np.random.default_rng(seed)
    tol = 1e-12 * max(a, b)

    def on_boundary(p):
        return p[0] < tol or p[0] > a - tol or p[1] < tol or p[1] > b - tol

    edge_mid, keys = {}, []
    for t in tris:
        for i, j in zip(t, np.roll(t, -1)):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                edge_mid[key] = len(verts) + len(keys)
                keys.append(key)
    P = verts[[k[0] for k in keys]]
    Q = verts[[k[1] for k in keys]]
    length = np.hypot(*(Q - P).T)
    boundary = np.array([on_boundary(p) and on_boundary(q) and on_boundary(0.5 * (p + q)) for p, q in zip(P, Q)])

    def draw(idx):
        # boundary midpoints slide along the edge so the domain stays exact
        out = np.empty((len(idx), 2))
        for r, e in enumerate(idx):
            if boundary[e]:
                s = rng.uniform(-amplitude, amplitude)
                out[r] = s * (Q[e] - P[e])
            else:
                rad = amplitude * length[e] * np.sqrt(rng.uniform())
                phi = rng.uniform(0.0, 2.0 * np.pi)
                out[r] = rad * np.array([np.cos(phi), np.sin(phi)])
        return out

    mids = 0.5 * (P + Q) + draw(range(len(keys)))
    cells = []
    for i, j, k in tris:
        cells.append([i, edge_mid[(min(i, j), max(i, j))], j, edge_mid[(min(j, k), max(j, k))], k,
                      edge_mid[(min(k, i), max(k, i))]])
    cells_arr = np.array(cells)
    nv = len(verts)
    # two displaced midpoints seen from a shared corner can swap order and
    # fold the hexagon; redraw the midpoints of such cells
    for _ in range(max_rounds):
        xy = np.vstack([verts, mids])
        bad = np.flatnonzero(~_simple_hexagons(xy[cells_arr]))
        if not bad.size:
            return xy, cells
        redo = np.unique(cells_arr[bad][:, 1::2] - nv)
        mids[redo] = 0.5 * (P[redo] + Q[redo]) + draw(redo)
    raise MeshError("could not place non-folding edge midpoints")


def _simple_hexagons(xy):
    """True for each closed polygon (rows of ``xy``) that is simple and CCW."""
    n = xy.shape[1]
    nxt = np.roll(xy, -1, axis=1)
    area = 0.5 * np.sum(xy[..., 0] * nxt[..., 1] - nxt[..., 0] * xy[..., 1], axis=1)
    ok = area > 0
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            ok &= ~_segments_cross(xy[:, i], nxt[:, i], xy[:, j], nxt[:, j], 0.0)
    return ok


def _clip_convex(poly, a, b):
    """Sutherland-Hodgman clip of a convex polygon by the box [0,a]x[0,b]."""
    planes = [(0, 0.0, 1.0), (0, a, -1.0), (1, 0.0, 1.0), (1, b, -1.0)]
    out = list(poly)
    for axis, c, sgn in planes:
        if not out:
            break
        src, out = out, []
        for k in range(len(src)):
            p, q = src[k], src[(k + 1) % len(src)]
            dp, dq = sgn * (p[axis] - c), sgn * (q[axis] - c)
            if dp >= 0:
                out.append(p)
            if dp * dq < 0:
                s = dp / (dp - dq)
                r = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
                r[axis] = c
                out.append(tuple(r))
    return out


class _VertexPool:
    """Merges coordinates that agree to a relative tolerance."""

    def __init__(self, scale, tol=1e-9):
        self.q = tol * scale
        self.coords = []
        self.index = {}

    def add(self, p):
        key = (round(p[0] / self.q), round(p[1] / self.q))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                k = (key[0] + dx, key[1] + dy)
                if k in self.index:
                    return self.index[k]
        self.index[key] = len(self.coords)
        self.coords.append((float(p[0]), float(p[1])))
        return self.index[key]

    def cycle(self, pts):
        ids = []
        for p in pts:
            v = self.add(p)
            if not ids or ids[-1] != v:
                ids.append(v)
        while len(ids) > 1 and ids[0] == ids[-1]:
            ids.pop()
        return ids


def _hexagons(n, a, b, snap=0.3, sliver=1e-3):
    # pointy-top regular hexagons, n columns across the width; x = 0, x = a
    # and y = 0 pass through rows of centres, lattice vertices close to y = b
    # are snapped onto it so the clipped cells keep reasonable shape
    w = a / n
    r = w / np.sqrt(3.0)
    dy = 1.5 * r
    rows = int(np.ceil(b / dy)) + 2
    cols = n + 2
    corner_angles = np.deg2rad(30.0 + 60.0 * np.arange(6))
    pool = _VertexPool(max(a, b))
    polys = []
    for j in range(-1, rows):
        shift = 0.5 * w if j % 2 else 0.0
        for i in range(-1, cols):
            cx, cy = i * w + shift, j * dy
            pts = []
            for ang in corner_angles:
                px, py = cx + r * np.cos(ang), cy + r * np.sin(ang)
                if abs(py - b) < snap * r:
                    py = b
                pts.append((px, py))
            clipped = _clip_convex(pts, a, b)
            if len(clipped) >= 3 and _shoelace(np.array(clipped)) > 1e-12 * a * b:
                polys.append(clipped)
    return _pool_cells(polys, pool, sliver)


def _pool_cells(polys, pool, sliver):
    cells = [pool.cycle(p) for p in polys]
    cells = [c for c in cells if len(c) >= 3]
    verts = np.array(pool.coords)
    # points introduced by clipping may lie on a neighbour's edge: insert them
    cells = _insert_hanging(verts, cells)
    cells = _merge_slivers(verts, cells, sliver)
    used = sorted({v for c in cells for v in c})
    remap = {v: k for k, v in enumerate(used)}
    return verts[used], [[remap[v] for v in c] for c in cells]


def _insert_hanging(verts, cells, rel=1e-9):
    """Insert vertices lying in the interior of a cell edge into that cycle."""
    from scipy.spatial import cKDTree

    tree = cKDTree(verts)
    out = []
    for cyc in cells:
        new = []
        for k in range(len(cyc)):
            p, q = cyc[k], cyc[(k + 1) % len(cyc)]
            new.append(p)
            P, Q = verts[p], verts[q]
            L = float(np.hypot(*(Q - P)))
            cand = tree.query_ball_point(0.5 * (P + Q), 0.5 * L + 1e-12)
            inner = []
            for v in cand:
                if v in (p, q):
                    continue
                s = np.dot(verts[v] - P, Q - P) / L**2
                d = verts[v] - P
                off = abs((Q - P)[0] * d[1] - (Q - P)[1] * d[0]) / L
                if 0 < s < 1 and off < rel * L:
                    inner.append((s, v))
            new.extend(v for _, v in sorted(inner))
        out.append(new)
    return out


def _merge_slivers(verts, cells, rel):
    areas = np.array([_shoelace(verts[c]) for c in cells])
    while True:
        small = np.flatnonzero(areas < rel * areas.mean())
        if small.size == 0:
            return cells
        s = int(small[0])
        cs = cells[s]
        best, best_len = None, -1.0
        for k in range(len(cs)):
            e = (cs[(k + 1) % len(cs)], cs[k])
            for c, other in enumerate(cells):
                if c == s:
                    continue
                for m in range(len(other)):
                    if (other[m], other[(m + 1) % len(other)]) == e:
                        L = float(np.hypot(*(verts[e[0]] - verts[e[1]])))
                        if L > best_len:
                            best, best_len = (c, k, m), L
        if best is None:
            raise MeshError("sliver cell without neighbour")
        c, k, m = best
        other = cells[c]
        # splice the sliver cycle into the neighbour across the shared edge
        a_cycle = cs[k + 1 :] + cs[: k + 1]
        b_cycle = other[m + 1 :] + other[: m + 1]
        merged = b_cycle[:-1] + a_cycle[:-1]
        merged = _drop_spikes(merged)
        cells[c] = merged
        del cells[s]
        areas = np.array([_shoelace(verts[cc]) for cc in cells])


def _drop_spikes(cyc):
    changed = True
    while changed and len(cyc) > 3:
        changed = False
        for k in range(len(cyc)):
            if cyc[k - 1] == cyc[(k + 1) % len(cyc)]:
                drop = {k, (k + 1) % len(cyc)}
                cyc = [v for i, v in enumerate(cyc) if i not in drop]
                changed = True
                break
    return cyc


def _mirrored_voronoi(points, a, b):
    mirrored = [
        points,
        np.column_stack([-points[:, 0], points[:, 1]]),
        np.column_stack([2 * a - points[:, 0], points[:, 1]]),
        np.column_stack([points[:, 0], -points[:, 1]]),
        np.column_stack([points[:, 0], 2 * b - points[:, 1]]),
    ]
    vor = Voronoi(np.vstack(mirrored))
    polys = []
    for k in range(len(points)):
        region = vor.regions[vor.point_region[k]]
        if -1 in region or len(region) < 3:
            raise MeshError("unbounded Voronoi region")
        pts = vor.vertices[region].copy()
        pts[:, 0] = np.clip(pts[:, 0], 0.0, a)
        pts[:, 1] = np.clip(pts[:, 1], 0.0, b)
        if _shoelace(pts) < 0:
            pts = pts[::-1]
        polys.append(pts)
    return polys


def _polygon_centroid(pts):
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    A = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6 * A)


def _voronoi(n, a, b, seed, lloyd_iterations=3, short_edge=0.05):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2)) * [a, b]
    for _ in range(lloyd_iterations):
        pts = np.array([_polygon_centroid(p) for p in _mirrored_voronoi(pts, a, b)])
    polys = _mirrored_voronoi(pts, a, b)
    pool = _VertexPool(max(a, b))
    cells = [pool.cycle(p) for p in polys]
    verts = np.array(pool.coords)
    verts, cells = _collapse_short_edges(verts, cells, a, b, short_edge)
    return verts, cells


def _collapse_short_edges(verts, cells, a, b, rel):
    """Collapse edges shorter than ``rel`` times the median edge length.

    Near-cocircular seeds give Voronoi edges orders of magnitude shorter than
    the cell size; they are merged into one vertex (kept on the boundary and
    at the domain corners when one endpoint lies there).
    """
    tol = 1e-12 * max(a, b)

    def rank(p):
        on_x = p[0] < tol or p[0] > a - tol
        on_y = p[1] < tol or p[1] > b - tol
        return int(on_x) + int(on_y)

    verts = verts.copy()
    while True:
        lengths = {}
        for cyc in cells:
            for k in range(len(cyc)):
                u, v = cyc[k], cyc[(k + 1) % len(cyc)]
                key = (min(u, v), max(u, v))
                lengths[key] = float(np.hypot(*(verts[u] - verts[v])))
        limit = rel * float(np.median(list(lengths.values())))
        pick = None
        for L, (u, v) in sorted((L, e) for e, L in lengths.items() if L < limit):
            ru, rv = rank(verts[u]), rank(verts[v])
            if ru == rv and ru > 0 and (ru == 2 or not _same_side(verts[u], verts[v], a, b, tol)):
                continue
            if any(u in c and v in c and len(c) <= 3 for c in cells):
                continue
            pick = (u, v, ru, rv)
            break
        if pick is None:
            break
        u, v, ru, rv = pick
        if rv > ru:
            u, v = v, u
        elif ru == rv:
            verts[u] = 0.5 * (verts[u] + verts[v])
        new_cells = []
        for cyc in cells:
            cyc = [u if w == v else w for w in cyc]
            out = []
            for w in cyc:
                if not out or out[-1] != w:
                    out.append(w)
            if len(out) > 1 and out[0] == out[-1]:
                out.pop()
            new_cells.append(out)
        cells = new_cells
    used = sorted({w for c in cells for w in c})
    remap = {w: k for k, w in enumerate(used)}
    return verts[used], [[remap[w] for w in c] for c in cells]


def _same_side(p, q, a, b, tol):
    return (
        (p[0] < tol and q[0] < tol)
        or (p[0] > a - tol and q[0] > a - tol)
        or (p[1] < tol and q[1] < tol)
        or (p[1] > b - tol and q[1] > b - tol)
    )


def _lshape_squares(n):
    m = 2 * n
    hs = 1.0 / m
    index = {}
    verts = []
    for j in range(m + 1):
        for i in range(m + 1):
            if i > n and j > n:
                continue
            index[(i, j)] = len(verts)
            verts.append((i * hs, j * hs))
    cells = []
    for j in range(m):
        for i in range(m):
            if i >= n and j >= n:
                continue
            cells.append([index[(i, j)], index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]])
    return np.array(verts), cells


def refine_corner(mesh: PolygonMesh, corner_point) -> PolygonMesh:
    """Split every cell touching ``corner_point`` into quadrilaterals.

    Each such cell is cut by joining its area centroid to the midpoints of
    its edges. Neighbouring cells receive the edge midpoints as extra
    vertices, so they turn into polygons with more sides. Boundary tags are
    inherited by the two halves of a split boundary edge.
    """
    corner = mesh.find_vertex(corner_point)
    verts = [tuple(v) for v in mesh.vertices]
    split = {c for c, cyc in enumerate(mesh.cells) if corner in cyc.tolist()}


    mid_of_edge = {}
    for c in sorted(split):
        for e in mesh.cell_edges[c]:
            if e not in mid_of_edge:
                p, q = mesh.vertices[mesh.edges[e]]
                mid_of_edge[int(e)] = len(verts)
                verts.append(tuple(0.5 * (p + q)))

    cells = []
    for c, cyc in enumerate(mesh.cells):
        cyc = cyc.tolist()
        edges = mesh.cell_edges[c].tolist()
        if c in split:
            xy = mesh.vertices[cyc]
            centre = len(verts)
            verts.append(tuple(_polygon_centroid(xy)))
            nv = len(cyc)
            for j in range(nv):
                m_next = mid_of_edge[edges[j]]
                m_prev = mid_of_edge[edges[j - 1]]
                cells.append([cyc[j], m_next, centre, m_prev])
        else:
            out = []
            for j, v in enumerate(cyc):
                out.append(v)
                if edges[j] in mid_of_edge:
                    out.append(mid_of_edge[edges[j]])
            cells.append(out)

    tags = {}
    for e, tag in mesh.boundary_tags.items():
        a, b = (int(v) for v in mesh.edges[e])
        if e in mid_of_edge:
            m = mid_of_edge[e]
            tags[(a, m)] = tag
            tags[(m, b)] = tag
        else:
            tags[(a, b)] = tag
    return build_mesh_with_tags(np.array(verts), cells, tags)
