"""What happens on a single element.

A non-convex pentagon is built, and its two projectors are checked:
the energy projector must reproduce linear shear fields, and the
local stiffness must see exactly the three plate rigid motions.
"""

import numpy as np

from vem_plate import Material, local_system, pi_eps
from vem_plate.mesh.core import ElementGeometry

verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 0.4], [0.0, 1.0]])
elem = ElementGeometry.from_vertices(verts)
mat = Material(E=1.0, nu=0.3, t=0.05)
print(f"pentagon: area {elem.area:.3f}, diameter {elem.diameter:.3f}")

proj = pi_eps(elem, mat)
# D holds the dofs of the six linear fields; projecting them must give
# back the same fields
print("max |P D - I| =", f"{np.abs(proj.P @ proj.D - np.eye(6)).max():.1e}")

K = local_system(elem, mat).K
s = 1.0 / np.sqrt(np.diag(K))
ev = np.linalg.eigvalsh(s[:, None] * K * s)
print("smallest scaled eigenvalues:", " ".join(f"{v:.1e}" for v in ev[:5]))
print("kernel dimension:", int(np.sum(ev < 1e-9 * ev.max())))

# Halving the thickness multiplies the shear part by four; the bending
# part does not change.
K_thin = local_system(elem, mat.with_thickness(0.025)).K
print(f"||K(t/2)|| / ||K(t)|| = {np.linalg.norm(K_thin) / np.linalg.norm(K):.3f}")
