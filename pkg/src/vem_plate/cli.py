"""``vem-plate`` command line.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .local_vem import LocalAssemblyError
from .mesh import MeshError
from .system import SolverError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _floats(text):
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value file with run settings")
    common.add_argument("--family", type=_names, help="mesh families, comma separated (T1..T7)")
    common.add_argument("--levels", type=_ints, help="refinement parameters, e.g. 8,16,32")
    common.add_argument("--thickness", type=_floats, help="plate thicknesses, e.g. 1e-1,1e-3")
    common.add_argument("--seed", type=int, help="seed for the random mesh families")
    common.add_argument("--out", metavar="DIR", help="output directory (default: results)")
    common.add_argument("-E", dest="E", type=float, help="Young modulus")
    common.add_argument("--nu", type=float, help="Poisson ratio")

    parser = _Parser(
        prog="vem-plate",
        description="Virtual element solver for Reissner-Mindlin plates in shear-strain/deflection form.",
    )
    sub = parser.add_subparsers(dest="experiment", metavar="<subcommand>", parser_class=_Parser)
    sub.required = True
    sub.add_parser("test1", parents=[common], help="clamped square, manufactured solution, convergence")
    sub.add_parser("test2", parents=[common], help="simply supported rectangle, thin-plate limit")
    sub.add_parser("test3", parents=[common], help="L-shaped plate, corner deflection")
    p = sub.add_parser("solve", parents=[common], help="solve on a mesh file and dump vertex fields")
    p.add_argument("mesh_file", nargs="?", help="mesh in the vem-mesh text format")
    p.add_argument("--exact", choices=("test1", "test2"), help="compare against a known solution")
    p.add_argument("--load", choices=ex.LOADS, help="transversal load (default: the exact one, else zero)")
    sub.add_parser("meshgen", parents=[common], help="write generated meshes to files")
    return parser


def config_from_args(args) -> ex.RunConfig:
    overrides = dict(
        experiment=args.experiment,
        families=args.family,
        levels=args.levels,
        thicknesses=args.thickness,
        seed=args.seed,
        out=args.out,
        E=args.E,
        nu=args.nu,
        mesh=getattr(args, "mesh_file", None),
        exact=getattr(args, "exact", None),
        load=getattr(args, "load", None),
    )
    if args.config:
        return ex.RunConfig.from_file(args.config, **overrides)
    return ex.RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _report(results):
    for r in results:
        print(r.path)
        if r.rates is not None:
            orders = ", ".join(f"{k} {v:.2f}" for k, v in r.rates.orders.items())
            print(f"  orders: {orders}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ex.ConfigError, OSError) as exc:
        print(f"vem-plate: {exc}", file=sys.stderr)
        return 1
    try:
        if cfg.experiment == "test1":
            _report(ex.run_test1(cfg))
        elif cfg.experiment == "test2":
            _report(ex.run_test2(cfg))
        elif cfg.experiment == "test3":
            for r in ex.run_test3(cfg):
                print(r.path)
                for row in r.rows:
                    print(f"  {row[0]} n={row[1]}: dofs {row[2]} (free {row[3]}), corner w {row[4]:.8f}")
        elif cfg.experiment == "solve":
            _, report = ex.solve_once(cfg)
            print(f"{cfg.out}/solution.csv")
            if report is not None:
                print(
                    f"e_w {report.e_w:.4e}  e_grad_w {report.e_grad_w:.4e}  "
                    f"e_theta {report.e_theta:.4e}  energy {report.energy:.4e}"
                )
        else:
            for path in ex.mesh_generate(cfg):
                print(path)
    except (ex.ConfigError, MeshError, OSError) as exc:
        print(f"vem-plate: {exc}", file=sys.stderr)
        return 1
    except (SolverError, LocalAssemblyError, ArithmeticError) as exc:
        print(f"vem-plate: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
