"""End-to-end acceptance checks; each records one PASS/FAIL line that the
terminal summary prints after the run."""

import time

import numpy as np
import pytest

from helpers import is_convex, patch_error, random_convex_polygon, random_star_polygon
from oracle import eval_raw, oracle_pi_eps, oracle_pi_zero
from vem_plate import experiments as ex
from vem_plate.analysis import convergence_rates, corner_value
from vem_plate.local_vem import Material, local_system, monomial_values, pi_eps, pi_zero
from vem_plate.mesh import LSHAPE_CORNER, generate_mesh
from vem_plate.mesh.core import ElementGeometry
from vem_plate.system import _shape_key, element_geometries

# published reference values
TABLE1_T1 = {"e_w": 2.09, "e_grad_w": 2.10, "e_theta": 2.10, "energy": 1.07}
TABLE1_T2 = {"e_w": 1.95, "e_grad_w": 1.96, "e_theta": 1.96, "energy": 1.12}
TABLE1_T3 = {"e_w": 2.18, "e_grad_w": 2.17, "e_theta": 2.17, "energy": 1.11}
E_W_COARSE_T1 = 1.108e-01
KIRCHHOFF_FINEST_T1 = 1.666e-04
LSHAPE_BASE = 0.01953427


def _rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def test_criterion_1_projector_oracle(record, rng):
    start = time.perf_counter()
    mat = Material(E=1.0, nu=0.0, t=0.1)
    polys = [random_convex_polygon(rng, int(rng.integers(4, 11))) for _ in range(50)]
    while len(polys) < 70:
        P = random_star_polygon(rng, int(rng.integers(5, 11)))
        if not is_convex(P):
            polys.append(P)
    worst_eps = worst_zero = 0.0
    for P in polys:
        elem = ElementGeometry.from_vertices(P)
        tau = rng.standard_normal(3 * elem.n)
        coef = pi_eps(elem, mat).P @ tau
        pts = np.vstack([P, P.mean(axis=0)])
        ours = np.einsum("pka,a->pk", monomial_values(elem, pts), coef)
        worst_eps = max(worst_eps, _rel(ours, eval_raw(oracle_pi_eps(P, tau), pts)))
        worst_zero = max(worst_zero, _rel(pi_zero(elem).P0 @ tau, oracle_pi_zero(P, tau)))
    elapsed = time.perf_counter() - start
    ok = worst_eps <= 1e-10 and worst_zero <= 1e-10 and elapsed < 5.0
    record(1, "projector oracle", ok, f"max rel dev Pi_eps {worst_eps:.1e}, Pi_0 {worst_zero:.1e}, {elapsed:.1f} s")
    assert ok


def _coarsest():
    rect = {"a": 1.0, "b": 2.0}
    yield "T1", generate_mesh("T1", ex.TEST1_LEVELS["T1"][0])
    yield "T2", generate_mesh("T2", ex.TEST1_LEVELS["T2"][0])
    yield "T3", generate_mesh("T3", ex.TEST1_LEVELS["T3"][0], seed=0)
    yield "T4", generate_mesh("T4", ex.TEST2_LEVELS["T4"][0], rect)
    yield "T5", generate_mesh("T5", ex.TEST2_LEVELS["T5"][0], rect, seed=0)
    yield "T6", generate_mesh("T6", ex.TEST3_LEVELS["T6"][0])
    # k = 0 coincides with T6; the finest refined mesh adds the hanging-node cells
    yield "T7", generate_mesh("T7", ex.TEST3_LEVELS["T7"][-1])


def test_criterion_2_reproduction_and_kernels(record):
    start = time.perf_counter()
    mat = Material(E=1.0, nu=0.0, t=0.1)
    worst, bad_kernel, checked = 0.0, [], 0
    for fam, mesh in _coarsest():
        seen = set()
        for g in element_geometries(mesh):
            key = _shape_key(g)
            if key in seen:
                continue
            seen.add(key)
            checked += 1
            proj = pi_eps(g, mat)
            worst = max(worst, np.abs(proj.P @ proj.D - np.eye(6)).max())
            K = local_system(g, mat).K
            # equilibrate first: tiny cells mix values, gradients and shear
            # terms of very different magnitude
            sc = 1.0 / np.sqrt(np.diag(K))
            ev = np.linalg.eigvalsh(sc[:, None] * K * sc)
            dim = int(np.sum(ev < 1e-9 * np.abs(ev).max()))
            if dim != 3:
                bad_kernel.append((fam, g.cell_id, dim))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and not bad_kernel and elapsed < 10.0
    record(2, "reproduction and kernels", ok, f"{checked} distinct cells, max |P D - I| {worst:.1e}, bad kernels {bad_kernel}, {elapsed:.1f} s")
    assert ok


def test_criterion_3_patch_test(record):
    start = time.perf_counter()
    errs = {}
    for fam in ("T1", "T2", "T3"):
        mesh = generate_mesh(fam, ex.TEST1_LEVELS[fam][0], seed=2)
        errs[fam] = patch_error(mesh)[0]
    elapsed = time.perf_counter() - start
    ok = max(errs.values()) <= 1e-8 and elapsed < 5.0
    detail = ", ".join(f"{k} e_w {v:.1e}" for k, v in errs.items())
    record(3, "patch test", ok, f"{detail}, {elapsed:.1f} s")
    assert ok


# strongly non-convex T3 cells may fall back to uniform load weights
UNIFORM_WEIGHTS = pytest.mark.filterwarnings("ignore:.*uniform load weights:RuntimeWarning")


@UNIFORM_WEIGHTS
def test_criterion_4_test1_orders(record, tmp_path):
    start = time.perf_counter()
    lines, ok = [], True
    for fam, ref, tol in (("T1", TABLE1_T1, None), ("T2", TABLE1_T2, None), ("T3", TABLE1_T3, 0.35)):
        cfg = ex.RunConfig(experiment="test1", families=(fam,), levels=(8, 16, 32, 64), thicknesses=(1e-3,), out=str(tmp_path))
        res = ex.run_test1(cfg)[0]
        orders = res.rates.orders
        for k, target in ref.items():
            lim = tol if tol is not None else (0.20 if k == "energy" else 0.25)
            ok &= abs(orders[k] - target) <= lim
        lines.append(f"{fam} " + "/".join(f"{orders[k]:.2f}" for k in ref))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 180.0
    record(4, "Test 1 orders at t=1e-3", ok, f"{'; '.join(lines)} (e_w/e_grad_w/e_theta/energy), {elapsed:.0f} s")
    assert ok


def test_criterion_5_coarse_magnitude(record):
    mesh = generate_mesh("T1", ex.TEST1_LEVELS["T1"][0])
    exact = ex.analysis.test1_exact(0.1)
    prep = ex.prepare(mesh, Material(t=0.1), exact.g)
    sol, A = prep.solve(0.1)
    e_w = ex.analysis.error_discrete_l2("w", ex.analysis.interpolate_dofs(exact, mesh, prep.dofmap), sol, mesh)
    ratio = e_w / E_W_COARSE_T1
    ok = 1 / 1.5 <= ratio <= 1.5
    record(5, "Test 1 coarse magnitude", ok, f"e_w {e_w:.4e} vs {E_W_COARSE_T1:.4e} (ratio {ratio:.2f}, h {mesh.h:.3f})")
    assert ok


@pytest.fixture(scope="module")
def locking_rows(tmp_path_factory):
    cfg = ex.RunConfig(experiment="test2", families=("T1",), thicknesses=(1e-4, 1e-5), out=str(tmp_path_factory.mktemp("t2")))
    start = time.perf_counter()
    res = ex.run_test2(cfg)[0]
    hs = [generate_mesh("T1", n, {"a": 1.0, "b": 2.0}).h for n in ex.TEST2_LEVELS["T1"]]
    return np.array(hs), np.array(res.rows[0][1:]), np.array(res.rows[1][1:]), time.perf_counter() - start


def test_criterion_6_locking_free(record, locking_rows):
    h, r4, r5, elapsed = locking_rows
    spread = np.max(np.abs(r4 - r5) / r5)
    order = convergence_rates(h[-3:], r5[-3:]).order("error")
    ok = spread < 0.01 and order >= 1.8 and np.all(np.diff(r5) < 0) and elapsed < 120.0
    record(6, "locking-free", ok, f"max rel gap t=1e-4 vs 1e-5 {spread:.1e}, order {order:.2f}, {elapsed:.0f} s")
    assert ok


def test_criterion_7_kirchhoff_magnitude(record, locking_rows):
    h, _, r5, _ = locking_rows
    ratio = r5[-1] / KIRCHHOFF_FINEST_T1
    ok = 0.5 <= ratio <= 2.0 and abs(h[-1] - 1.6e-2) < 1e-3
    record(7, "Kirchhoff-limit magnitude", ok, f"e_w {r5[-1]:.3e} vs {KIRCHHOFF_FINEST_T1:.3e} at h {h[-1]:.4f} (ratio {ratio:.2f})")
    assert ok


def test_criterion_8_lshape(record, tmp_path):
    start = time.perf_counter()
    res = ex.run_test3(ex.RunConfig(experiment="test3", families=("T6",), levels=(8,), out=str(tmp_path)))
    base = res[0].rows[0]
    mesh = generate_mesh("T7", 5)
    prep = ex.prepare(mesh, Material(t=0.1), lambda x, y: np.ones_like(x))
    w5 = corner_value(prep.solve(0.1)[0], mesh, LSHAPE_CORNER)
    err5 = abs(w5 - ex.LSHAPE_REFERENCE)
    elapsed = time.perf_counter() - start
    ok = base[2] == 1541 and abs(base[4] - LSHAPE_BASE) <= 5e-4 and err5 <= 3e-5 and elapsed < 120.0
    record(
        8,
        "L-shape corner",
        ok,
        f"base dofs {base[2]} (free {base[3]}), corner {base[4]:.8f}; 5 refinements: {w5:.8f}, |err| {err5:.2e}, {elapsed:.0f} s",
    )
    assert ok


@UNIFORM_WEIGHTS
def test_criterion_9_determinism(record, tmp_path):
    files = []
    for run in ("a", "b"):
        out = tmp_path / run
        ex.run_test1(ex.RunConfig(experiment="test1", families=("T3",), levels=(4, 8), thicknesses=(1e-2,), seed=3, out=str(out)))
        ex.run_test2(ex.RunConfig(experiment="test2", families=("T5",), levels=(25, 60), thicknesses=(1e-3,), seed=3, out=str(out)))
        ex.run_test3(ex.RunConfig(experiment="test3", families=("T7",), levels=(1,), out=str(out)))
        files.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    ok = files[0] == files[1] and len(files[0]) == 3
    record(9, "determinism", ok, f"{len(files[0])} CSVs byte-identical across two runs" if ok else "CSV bytes differ")
    assert ok
