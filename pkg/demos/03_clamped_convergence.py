"""Convergence on a clamped square with a known solution.

The manufactured solution is solved on three triangular meshes at a
moderate thickness. Errors in the deflection, its gradient, the
rotations and the energy are printed along with the fitted orders.
"""

import numpy as np

from vem_plate import Material, convergence_rates, error_report, generate_mesh, interpolate_dofs, test1_exact
from vem_plate.experiments import prepare

t = 1e-2
exact = test1_exact(t)
kinds = ("e_w", "e_grad_w", "e_theta", "energy")
h, errs = [], {k: [] for k in kinds}

print(f"{'n':>3} {'h':>8} {'dofs':>6}  " + "  ".join(f"{k:>9}" for k in kinds))
for n in (8, 16, 32):
    mesh = generate_mesh("T1", n)
    prep = prepare(mesh, Material(t=t), exact.g)
    sol, A_full = prep.solve(t)
    rep = error_report(interpolate_dofs(exact, mesh, prep.dofmap), sol, mesh, A_full, t)
    h.append(rep.h)
    for k in kinds:
        errs[k].append(getattr(rep, k))
    print(f"{n:3d} {rep.h:8.4f} {rep.n_dof:6d}  " + "  ".join(f"{getattr(rep, k):9.3e}" for k in kinds))

rates = convergence_rates(np.array(h), {k: np.array(v) for k, v in errs.items()})
print("orders:", "  ".join(f"{k} {rates.order(k):.2f}" for k in kinds))
# expect about 2 for the first three columns and about 1 for the energy
