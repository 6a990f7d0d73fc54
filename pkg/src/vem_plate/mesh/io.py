"""Plain-text mesh format.

::

    vem-mesh 1
    vertices N
    x y              (N lines)
    cells M
    k i1 ... ik      (M lines)
    boundary B
    i j TAG          (B lines, TAG in {C, S, F})

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import os

import numpy as np

from .core import MeshError, PolygonMesh, Tag, build_mesh_with_tags


class MeshParseError(MeshError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def write_mesh(mesh: PolygonMesh, path) -> None:
    lines = ["vem-mesh 1", f"vertices {mesh.n_vertices}"]
    # repr() gives the shortest string that round-trips a float
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices]
    lines.append(f"cells {mesh.n_cells}")
    lines += [" ".join(str(v) for v in [len(c), *c.tolist()]) for c in mesh.cells]
    lines.append(f"boundary {len(mesh.boundary_tags)}")
    for e in sorted(mesh.boundary_tags):
        i, j = mesh.edges[e]
        lines.append(f"{i} {j} {mesh.boundary_tags[e].value}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> PolygonMesh:
    path = os.fspath(path)
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [
        (k + 1, ln.strip()) for k, ln in enumerate(raw) if ln.strip() and not ln.lstrip().startswith("#")
    ]
    it = iter(lines)

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise MeshParseError(path, len(raw), f"unexpected end of file, expected {what}") from None

    def section(name):
        lineno, text = take(f"'{name}' header")
        parts = text.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshParseError(path, lineno, f"expected '{name} <count>'")
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshParseError(path, lineno, f"bad count {parts[1]!r}") from None
        if count < 0:
            raise MeshParseError(path, lineno, "negative count")
        return count

    lineno, text = take("header")
    if text.split() != ["vem-mesh", "1"]:
        raise MeshParseError(path, lineno, "missing 'vem-mesh 1' header")

    nv = section("vertices")
    verts = np.empty((nv, 2))
    for k in range(nv):
        lineno, text = take("vertex")
        parts = text.split()
        try:
            if len(parts) != 2:
                raise ValueError
            verts[k] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise MeshParseError(path, lineno, "expected 'x y'") from None

    nc = section("cells")
    cells = []
    for _ in range(nc):
        lineno, text = take("cell")
        try:
            nums = [int(p) for p in text.split()]
        except ValueError:
            raise MeshParseError(path, lineno, "non-integer in cell line") from None
        if not nums or nums[0] != len(nums) - 1:
            raise MeshParseError(path, lineno, "vertex count does not match the line")
        if nums[0] < 3:
            raise MeshParseError(path, lineno, "cell with fewer than 3 vertices")
        if any(v < 0 or v >= nv for v in nums[1:]):
            raise MeshParseError(path, lineno, "cell references a vertex index out of range")
        cells.append(nums[1:])

    nb = section("boundary")
    tags = {}
    for _ in range(nb):
        lineno, text = take("boundary edge")
        parts = text.split()
        try:
            i, j = int(parts[0]), int(parts[1])
            tag = Tag(parts[2])
            if len(parts) != 3:
                raise ValueError
        except (ValueError, IndexError):
            raise MeshParseError(path, lineno, "expected 'i j TAG' with TAG in C/S/F") from None
        tags[(i, j)] = tag
    extra = next(it, None)
    if extra is not None:
        raise MeshParseError(path, extra[0], "trailing content")
    return build_mesh_with_tags(verts, cells, tags)
