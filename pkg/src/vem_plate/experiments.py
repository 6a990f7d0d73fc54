"""Batch drivers for the convergence, locking and L-shape studies.

Every driver writes plain CSV with full-precision floats (``repr``), so a
rerun with the same configuration produces byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .local_vem import Material
from .mesh import LSHAPE_CORNER, PolygonMesh, Tag, generate_mesh, read_mesh, write_mesh
from .system import (
    assemble_load,
    assemble_operators,
    build_constraints,
    element_geometries,
    expand_solution,
    number_dofs,
    reduce_system,
    solve,
)

LSHAPE_REFERENCE = 0.01974057

# refinement ladders whose largest element diameters track the published
# mesh sizes (see README for the matching rule)
TEST1_LEVELS = {"T1": (12, 24, 45, 90, 171), "T2": (8, 16, 32, 64, 112), "T3": (12, 24, 45, 90, 171)}
TEST2_LEVELS = {"T1": (6, 11, 22, 44, 88), "T4": (4, 9, 17, 26, 36), "T5": (25, 140, 600, 1100, 4000)}
TEST3_LEVELS = {"T6": (8, 10, 16, 20, 30, 32, 40), "T7": (0, 1, 2, 3, 4, 5)}

EXPERIMENTS = ("test1", "test2", "test3", "solve", "meshgen")

_DEFAULTS = {
    "test1": dict(families=("T1", "T2", "T3"), thicknesses=(1e-1, 1e-2, 1e-3), E=1.0, nu=0.0),
    "test2": dict(families=("T1", "T4", "T5"), thicknesses=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5), E=1.0, nu=0.3),
    "test3": dict(families=("T6", "T7"), thicknesses=(1e-1,), E=1.0, nu=0.0),
    "solve": dict(families=(), thicknesses=(1e-1,), E=1.0, nu=0.0),
    "meshgen": dict(families=("T1",), thicknesses=(1e-1,), E=1.0, nu=0.0),
}
_ALLOWED = {"test1": {"T1", "T2", "T3"}, "test2": {"T1", "T4", "T5"}, "test3": {"T6", "T7"}}


class ConfigError(ValueError):
    """Invalid run configuration (reported as a usage error)."""


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "test1"
    families: tuple = ()
    levels: tuple = ()
    thicknesses: tuple = ()
    E: float | None = None
    nu: float | None = None
    k: float = 5.0 / 6.0
    a: float = 1.0
    b: float = 2.0
    seed: int = 0
    out: str = "results"
    mesh: str | None = None
    exact: str | None = None
    load: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if any(t <= 0 for t in self.thicknesses):
            raise ConfigError("thicknesses must be positive")
        allowed = _ALLOWED.get(self.experiment)
        if allowed is not None:
            bad = set(self.families) - allowed
            if bad:
                raise ConfigError(f"{self.experiment} supports families {sorted(allowed)}, got {sorted(bad)}")

    def resolved(self) -> "RunConfig":
        """Fill unset fields with the experiment's published settings."""
        d = _DEFAULTS[self.experiment]
        return dataclasses.replace(
            self,
            families=self.families or d["families"],
            thicknesses=self.thicknesses or d["thicknesses"],
            E=d["E"] if self.E is None else self.E,
            nu=d["nu"] if self.nu is None else self.nu,
        )

    def material(self, t: float) -> Material:
        c = self.resolved()
        return Material(E=c.E, nu=c.nu, k=c.k, t=t)

    def ladder(self, family: str, table: dict) -> tuple:
        levels = self.levels or table[family]
        if not levels:
            raise ConfigError("refinement list must be nonempty")
        return tuple(int(n) for n in levels)

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        """Read a flat ``key = value`` file; ``#`` starts a comment."""
        values = {}
        names = {f.name: f for f in dataclasses.fields(cls)}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (s.strip() for s in line.split("=", 1))
                key = {"thickness": "thicknesses", "family": "families"}.get(key, key)
                if key not in names:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _parse_field(key, val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _parse_field(key: str, val: str):
    try:
        if key in ("families",):
            return tuple(s.strip() for s in val.split(",") if s.strip())
        if key == "levels":
            return tuple(int(s) for s in val.split(",") if s.strip())
        if key == "thicknesses":
            return tuple(float(s) for s in val.split(",") if s.strip())
        if key == "seed":
            return int(val)
        if key in ("E", "nu", "k", "a", "b"):
            return float(val)
    except ValueError:
        raise ConfigError(f"bad value {val!r} for {key}") from None
    return val


@dataclass
class Prepared:
    """A mesh with its dof map, constraints, operators and load, ready to
    solve for any thickness."""

    mesh: PolygonMesh
    dofmap: object
    constraints: object
    operators: object
    load: np.ndarray

    def solve(self, t: float):
        A_full = self.operators.matrix(t)
        system = reduce_system(A_full, self.load, self.constraints)
        solution = expand_solution(solve(system), self.constraints, self.dofmap)
        return solution, A_full


def prepare(mesh: PolygonMesh, material: Material, g) -> Prepared:
    geoms = element_geometries(mesh)
    dofmap = number_dofs(mesh)
    return Prepared(
        mesh=mesh,
        dofmap=dofmap,
        constraints=build_constraints(mesh, dofmap),
        operators=assemble_operators(mesh, material, dofmap, geoms),
        load=assemble_load(mesh, g, dofmap, geoms),
    )


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _tag(t: float) -> str:
    return f"{t:.0e}".replace("+", "")


TEST1_HEADER = ("n", "h", "n_dof", "e_w", "e_grad_w", "e_theta", "energy")
TEST1_KINDS = ("e_w", "e_grad_w", "e_theta", "energy")


@dataclass
class StudyResult:
    path: Path
    family: str
    thickness: float | None = None
    rows: list = field(default_factory=list)
    rates: analysis.RateTable | None = None


def run_test1(config: RunConfig) -> list:
    """Clamped square with a manufactured solution: one CSV per (family, t)
    with the error table and a final row of fitted orders."""
    cfg = config.resolved()
    out = Path(cfg.out)
    results = []
    g = analysis.test1_exact(1.0, cfg.E, cfg.nu).g
    for fam in cfg.families:
        per_t = {t: [] for t in cfg.thicknesses}
        for n in cfg.ladder(fam, TEST1_LEVELS):
            mesh = generate_mesh(fam, n, seed=cfg.seed if fam == "T3" else None)
            prep = prepare(mesh, cfg.material(cfg.thicknesses[0]), g)
            for t in cfg.thicknesses:
                exact = analysis.test1_exact(t, cfg.E, cfg.nu)
                sol, A_full = prep.solve(t)
                ex = analysis.interpolate_dofs(exact, mesh, prep.dofmap)
                rep = analysis.error_report(ex, sol, mesh, A_full, t)
                per_t[t].append((n, rep.h, rep.n_dof, rep.e_w, rep.e_grad_w, rep.e_theta, rep.energy))
        for t, rows in per_t.items():
            rates = None
            order_row = ["order", "", ""] + [""] * 4
            if len(rows) >= 2:
                cols = np.array([r[3:] for r in rows], dtype=float)
                rates = analysis.convergence_rates([r[1] for r in rows], dict(zip(TEST1_KINDS, cols.T)))
                order_row = ["order", "", ""] + [rates.order(k) for k in TEST1_KINDS]
            path = _write_csv(out / f"test1_{fam}_t{_tag(t)}.csv", TEST1_HEADER, rows + [order_row])
            results.append(StudyResult(path, fam, t, rows, rates))
    return results


def run_test2(config: RunConfig) -> list:
    """Simply supported rectangle against the thin-plate limit: e_w for
    every (t, h) pair, one CSV per family."""
    cfg = config.resolved()
    out = Path(cfg.out)
    exact = analysis.test2_kirchhoff(cfg.a, cfg.b, cfg.E, cfg.nu)
    dom = {"a": cfg.a, "b": cfg.b}
    results = []
    for fam in cfg.families:
        hs, table = [], {t: [] for t in cfg.thicknesses}
        for n in cfg.ladder(fam, TEST2_LEVELS):
            mesh = generate_mesh(
                fam, n, domain_params=dom, seed=cfg.seed if fam == "T5" else None, boundary=Tag.SIMPLY_SUPPORTED
            )
            prep = prepare(mesh, cfg.material(cfg.thicknesses[0]), exact.g)
            ex = analysis.interpolate_dofs(exact, mesh, prep.dofmap)
            hs.append(mesh.h)
            for t in cfg.thicknesses:
                sol, _ = prep.solve(t)
                table[t].append(analysis.error_discrete_l2("w", ex, sol, mesh))
        rows = [[t] + table[t] for t in cfg.thicknesses]
        path = _write_csv(out / f"test2_{fam}.csv", ["t\\h"] + [_fmt(h) for h in hs], rows)
        results.append(StudyResult(path, fam, None, rows))
    return results


TEST3_HEADER = ("mesh", "n", "n_dof", "n_free", "corner_w", "abs_error")


def run_test3(config: RunConfig) -> list:
    """L-shaped plate: deflection at the re-entrant corner on uniform (T6)
    and corner-refined (T7) meshes."""
    cfg = config.resolved()
    out = Path(cfg.out)
    t = cfg.thicknesses[0]
    results = []
    for fam in cfg.families:
        rows = []
        for n in cfg.ladder(fam, TEST3_LEVELS):
            mesh = generate_mesh(fam, n)
            prep = prepare(mesh, cfg.material(t), lambda x, y: np.ones_like(x))
            sol, _ = prep.solve(t)
            w = analysis.corner_value(sol, mesh, LSHAPE_CORNER)
            rows.append((fam, n, prep.dofmap.n_dof, prep.constraints.n_free, w, abs(w - LSHAPE_REFERENCE)))
        path = _write_csv(out / f"test3_{fam}.csv", TEST3_HEADER, rows)
        results.append(StudyResult(path, fam, t, rows))
    return results


SOLUTION_HEADER = ("x", "y", "w", "w_x", "w_y", "gamma_x", "gamma_y", "theta_x", "theta_y")
LOADS = ("zero", "one", "test1", "test2")


def _load(name: str, cfg: RunConfig):
    if name == "zero":
        return lambda x, y: np.zeros_like(x)
    if name == "one":
        return lambda x, y: np.ones_like(x)
    if name == "test1":
        return analysis.test1_exact(1.0, cfg.E, cfg.nu).g
    if name == "test2":
        return analysis.test2_kirchhoff(cfg.a, cfg.b, cfg.E, cfg.nu).g
    raise ConfigError(f"unknown load {name!r}; expected one of {LOADS}")


def solve_once(config: RunConfig):
    """Solve on a mesh file and dump vertex fields; with ``exact`` set, also
    write an error report. Returns ``(Solution, ErrorReport | None)``."""
    cfg = config.resolved()
    if not cfg.mesh:
        raise ConfigError("solve needs a mesh file")
    if cfg.exact not in (None, "test1", "test2"):
        raise ConfigError(f"unknown exact solution {cfg.exact!r}")
    mesh = read_mesh(cfg.mesh)
    t = cfg.thicknesses[0]
    g = _load(cfg.load or cfg.exact or "zero", cfg)
    prep = prepare(mesh, cfg.material(t), g)
    sol, A_full = prep.solve(t)
    out = Path(cfg.out)
    rows = np.column_stack([mesh.vertices, sol.w, sol.grad_w, sol.gamma, sol.theta])
    _write_csv(out / "solution.csv", SOLUTION_HEADER, rows.tolist())
    report = None
    if cfg.exact:
        if cfg.exact == "test1":
            exact = analysis.test1_exact(t, cfg.E, cfg.nu)
            kinds = analysis.KINDS
        else:
            exact = analysis.test2_kirchhoff(cfg.a, cfg.b, cfg.E, cfg.nu)
            kinds = ("w",)
        ex = analysis.interpolate_dofs(exact, mesh, prep.dofmap)
        report = analysis.error_report(ex, sol, mesh, A_full if exact.theta else None, t, kinds)
        fields = [f.name for f in dataclasses.fields(report)]
        _write_csv(out / "errors.csv", fields, [[getattr(report, f) for f in fields]])
    return sol, report


def mesh_generate(config: RunConfig) -> list:
    """Write every requested mesh in the text format; returns the paths."""
    cfg = config.resolved()
    paths = []
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for fam in cfg.families:
        table = TEST3_LEVELS if fam in ("T6", "T7") else TEST1_LEVELS if fam in TEST1_LEVELS else TEST2_LEVELS
        for n in cfg.ladder(fam, table):
            rect = fam in ("T4", "T5")
            mesh = generate_mesh(
                fam,
                n,
                domain_params={"a": cfg.a, "b": cfg.b} if rect else None,
                seed=cfg.seed if fam in ("T3", "T5") else None,
            )
            path = out / f"mesh_{fam}_{n}.txt"
            write_mesh(mesh, path)
            paths.append(path)
    return paths

