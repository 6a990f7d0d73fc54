"""Thin plates do not lock.

A simply supported rectangle carries the load whose thin-plate limit
is known in closed form. At t = 1e-2 the plate is still thick enough to
differ visibly from that limit. From 1e-3 down the error rows coincide
and keep converging as h shrinks, so the method does not lock.
"""

from vem_plate import Material, Tag, error_discrete_l2, generate_mesh, interpolate_dofs, test2_kirchhoff
from vem_plate.experiments import prepare

exact = test2_kirchhoff(a=1.0, b=2.0, nu=0.3)
thicknesses = (1e-2, 1e-3, 1e-4, 1e-5)
levels = (6, 11, 22)

print("t \\ n   " + "  ".join(f"{n:>9d}" for n in levels))
rows = {t: [] for t in thicknesses}
for n in levels:
    mesh = generate_mesh("T1", n, {"a": 1.0, "b": 2.0}, boundary=Tag.SIMPLY_SUPPORTED)
    prep = prepare(mesh, Material(nu=0.3, t=thicknesses[0]), exact.g)
    ref = interpolate_dofs(exact, mesh, prep.dofmap)
    # the operators are assembled once; only the shear scaling changes with t
    for t in thicknesses:
        sol, _ = prep.solve(t)
        rows[t].append(error_discrete_l2("w", ref, sol, mesh))
for t, vals in rows.items():
    print(f"{t:7.0e} " + "  ".join(f"{v:9.3e}" for v in vals))
