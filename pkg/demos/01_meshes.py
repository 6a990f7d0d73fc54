"""Tour of the seven mesh families.

Each family is generated at a small size and summarised: cell count,
vertex count, the range of polygon sizes and the mesh size h. The last
part writes one mesh to disk and reads it back.
"""

import tempfile
from collections import Counter
from pathlib import Path

from vem_plate import generate_mesh, read_mesh, write_mesh

RECT = {"a": 1.0, "b": 2.0}

cases = [
    ("T1", 4, {}),
    ("T2", 4, {}),
    ("T3", 4, {"seed": 0}),
    ("T4", 3, {"domain_params": RECT}),
    ("T5", 30, {"domain_params": RECT, "seed": 0}),
    ("T6", 8, {}),
    ("T7", 2, {}),
]

print(f"{'family':6} {'cells':>5} {'verts':>5}  {'h':>7}  polygon sizes")
for fam, n, kw in cases:
    mesh = generate_mesh(fam, n, **kw)
    sizes = Counter(len(c) for c in mesh.cells)
    hist = ", ".join(f"{k}-gons: {v}" for k, v in sorted(sizes.items()))
    print(f"{fam:6} {mesh.n_cells:5d} {mesh.n_vertices:5d}  {mesh.h:7.4f}  {hist}")

# T7 refines the cell at the re-entrant corner; the neighbours of the new
# cells pick up hanging nodes and become pentagons.

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "lshape.txt"
    mesh = generate_mesh("T7", 2)
    write_mesh(mesh, path)
    back = read_mesh(path)
    print(f"\nround trip through {path.name}: {back.n_cells} cells, "
          f"area {back.cell_areas().sum():.6f}")
