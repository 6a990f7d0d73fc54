"""Deflection at the re-entrant corner of an L-shaped plate.

The plate is clamped on its outer sides and free on the two sides
meeting at the corner (0.5, 0.5). Refining only the cells at that
corner drives the corner deflection towards a reference value.
"""

import numpy as np

from vem_plate import Material, corner_value, generate_mesh
from vem_plate.experiments import LSHAPE_REFERENCE, prepare
from vem_plate.mesh import LSHAPE_CORNER

print(f"{'k':>2} {'dofs':>5}  {'corner w':>10}  {'|error|':>9}")
for k in range(6):
    mesh = generate_mesh("T7", k)
    prep = prepare(mesh, Material(t=0.1), lambda x, y: np.ones_like(x))
    sol, _ = prep.solve(0.1)
    w = corner_value(sol, mesh, LSHAPE_CORNER)
    print(f"{k:2d} {prep.dofmap.n_dof:5d}  {w:10.8f}  {abs(w - LSHAPE_REFERENCE):9.2e}")
print(f"reference {LSHAPE_REFERENCE}")
