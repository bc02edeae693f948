"""Command-line entry point.

Exit status: 0 on success, 1 when a verification fails (invalid graph, barrier
inequality violated, parameters outside a family's domain, solver failure),
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .barriers import (
    BarrierSpec,
    ParameterDomainError,
    SearchError,
    TreeRadial,
    search_parameter,
    verify,
)
from .dirichlet import DirichletProblem, SolverError, solve_problem
from .experiments import (
    CSV_COLUMNS,
    PHASE_THRESHOLD,
    TREE_RADII,
    ExhaustionRun,
    MonotonicityError,
    exhaustion_run,
    tree_phase_sweep,
)
from .graph_core import (
    Branching,
    LatticeSpec,
    build_ball,
    spec_from_dict,
    validate,
)
from .operators import Potential
from .radial import radial_dirichlet_solve, tree_profile
from .reporting import csv_text, dumps, emit, field_arg, field_rows

log = logging.getLogger("plgraph")


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _apply_config(args, skip=()):
    """Fill flags left at None from the ``--config`` JSON; flags win."""
    if not getattr(args, "config", None):
        return {}
    cfg = _load_json(args.config)
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in skip:
            continue
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_graph_validate(args, out):
    cfg = _apply_config(args)
    graph = cfg.get("graph", cfg if "family" in cfg else None)
    if args.graph:
        graph = _load_json(args.graph)
    if graph is None:
        raise UsageError("graph validate needs --graph <spec file>")
    ball = build_ball(spec_from_dict(graph))
    problems = validate(ball)
    report = {"valid": not problems, "n_vertices": ball.n_vertices,
              "n_interior": int(ball.interior.sum()), "n_halo": int(ball.halo.sum()),
              "violations": problems}
    emit(args.out, "validate.json", dumps(report), out)
    if problems:
        raise VerificationFailure(f"{len(problems)} violation(s)")


def _barrier_setup(args):
    _apply_config(args)
    if args.family is None:
        raise UsageError("--family is required")
    alpha = 0.0 if args.alpha is None else float(args.alpha)
    spec = BarrierSpec(args.family, alpha=alpha, M=args.M, K=args.K, beta=args.beta,
                       gamma=args.gamma, sigma=args.sigma, metric=args.metric,
                       strict=not args.non_strict)
    c0 = 1.0 if args.c0 is None else float(args.c0)
    radius = args.radius if args.radius is not None else 30
    if spec.on_lattice:
        domain = build_ball(LatticeSpec(int(args.dim or 3), float(radius)))
        V = Potential(c0, alpha, "euclidean")
    else:
        branching = Branching.parse(args.branching or "constant:2")
        domain = TreeRadial(branching, int(radius))
        V = Potential(c0, alpha)
    tol = 1e-9 if args.tolerance is None else float(args.tolerance)
    return spec, domain, V, tol


def _r_min_kw(args):
    return {} if args.r_min is None else {"r_min": float(args.r_min)}


def cmd_barrier_verify(args, out):
    spec, domain, V, tol = _barrier_setup(args)
    rep = verify(spec, domain, V, tol, **_r_min_kw(args))
    emit(args.out, "barrier_verify.json", dumps(rep.to_json()), out)
    if not rep.passed:
        raise VerificationFailure(f"{spec.family} fails with margin {rep.margin:.3e}")


def cmd_barrier_search(args, out):
    spec, domain, V, _ = _barrier_setup(args)
    tol = 0.0 if args.tolerance is None else float(args.tolerance)
    window = tuple(args.window) if args.window else (0.0, 10.0)
    res = search_parameter(spec, domain, V, which=args.param, window=window,
                           iterations=args.iterations or 60, tolerance=tol, **_r_min_kw(args))
    doc = res.report.to_json()
    doc["parameter"] = {**doc["parameter"], res.parameter: res.value}
    doc["searched"] = res.parameter
    emit(args.out, "barrier_search.json", dumps(doc), out)


def cmd_dirichlet_solve(args, out):
    _apply_config(args)
    if not args.graph or not args.potential:
        raise UsageError("dirichlet solve needs --graph and --potential spec files")
    graph = args.graph if isinstance(args.graph, dict) else _load_json(args.graph)
    pot = args.potential if isinstance(args.potential, dict) else _load_json(args.potential)
    ball = build_ball(spec_from_dict(graph))
    V = Potential.from_dict(pot)
    g = field_arg(str(args.boundary if args.boundary is not None else 0.0), ball)
    f = field_arg(str(args.f if args.f is not None else 0.0), ball)
    rep = solve_problem(DirichletProblem(ball, V, f, g), args.method or "auto")
    emit(args.out, "solution.csv", csv_text(("vertex_id", "u"), field_rows(ball, rep.u)), out)
    emit(args.out, "solve_report.json", dumps(rep.to_json()), out)


def cmd_radial_solve(args, out):
    _apply_config(args)
    branching = Branching.parse(args.branching or "constant:2")
    R = int(args.radius if args.radius is not None else 100)
    alpha = 1.0 if args.alpha is None else float(args.alpha)
    c0 = 1.0 if args.c0 is None else float(args.c0)
    boundary = 1.0 if args.boundary is None else float(args.boundary)
    pot = Potential(c0, alpha)
    prof = radial_dirichlet_solve(tree_profile(branching, R), pot.of_distance, 0.0, boundary)
    rows = []
    for r, u in enumerate(prof.values):
        halo = r == R + 1
        rows.append({"r": r, "u": u, "Dplus": None if halo else prof.dplus[r],
                     "Dminus": None if halo else prof.dminus[r], "V": pot.of_distance(r).item()})
    emit(args.out, "radial.csv", csv_text(("r", "u", "Dplus", "Dminus", "V"), rows), out)


def cmd_experiment_exhaustion(args, out):
    if not args.config:
        raise UsageError("experiment exhaustion needs --config <file>")
    cfg = _load_json(args.config)
    if args.gamma is not None:
        cfg["gamma"] = args.gamma
    if args.radii:
        cfg["radii"] = args.radii
    if args.method:
        cfg["method"] = args.method
    out_dir = args.out or cfg.get("out")
    try:
        run = ExhaustionRun.from_config(cfg)
    except KeyError as exc:
        raise UsageError(f"config is missing {exc}") from exc
    res = exhaustion_run(run)
    emit(out_dir, "exhaustion.csv", csv_text(CSV_COLUMNS, res.rows), out)
    summary = {
        "graph": run.graph.to_dict() | {"radius": None},
        "potential": run.potential.to_dict(),
        "gamma": run.gamma,
        "radii": run.radii,
        "limits": res.limits,
        "converged": res.converged,
        "monotone": res.monotone,
        "solves": res.solve_reports,
        "note": "a positive stabilised limit is evidence (not proof) of a nonconstant bounded solution",
    }
    if out_dir:
        emit(out_dir, "summary.json", dumps(summary), out)


def cmd_experiment_phase_sweep(args, out):
    _apply_config(args)
    branchings = [Branching.parse(b) for b in (args.branching or ["constant:2", "power:2"])]
    alphas = [float(a) for a in (args.alpha or [1.0, 2.0])]
    radii = [int(r) for r in (args.radii or TREE_RADII)]
    threshold = PHASE_THRESHOLD if args.threshold is None else float(args.threshold)
    gamma = 1.0 if args.gamma is None else float(args.gamma)
    c0 = 1.0 if args.c0 is None else float(args.c0)
    cells = tree_phase_sweep(branchings, alphas, gamma, radii, c0, threshold)
    rows = [c.to_row() for c in cells]
    cols = ["branching", "alpha"] + [f"u0_R{R}" for R in radii] + ["classification", "threshold"]
    emit(args.out, "phase_sweep.csv", csv_text(cols, rows), out)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _number(text: str):
    """Parse a radius; integral values stay ints so CSV output matches config files."""
    x = float(text)
    return int(x) if x.is_integer() else x


def _common(p, out=True):
    p.add_argument("--config", help="JSON file with default values for the flags")
    if out:
        p.add_argument("--out", help="output directory (default: stdout)")


def _barrier_flags(p):
    p.add_argument("--family", choices=["tree_power", "tree_log", "growth_gauge", "lattice_power",
                                        "lattice_log", "lattice_inverse", "tree_inverse"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--c0", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--branching", help="tree branching, e.g. constant:2 or power:2")
    p.add_argument("--dim", type=int, help="lattice dimension n")
    p.add_argument("--metric", choices=["combinatorial", "euclidean"], help="growth_gauge metric")
    p.add_argument("--r-min", type=float, help="only check super-barriers at distance >= r-min")
    p.add_argument("--non-strict", action="store_true", help="skip parameter domain checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="group", metavar="{graph,barrier,dirichlet,radial,experiment}")

    g = top.add_parser("graph", help="graph family utilities").add_subparsers(dest="command")
    p = g.add_parser("validate", help="build a ball and check its invariants")
    _common(p)
    p.add_argument("--graph", help="graph family spec (JSON)")
    p.set_defaults(func=cmd_graph_validate)

    b = top.add_parser("barrier", help="barrier verification and constant search").add_subparsers(dest="command")
    p = b.add_parser("verify", help="check a barrier's inequality pointwise")
    _common(p)
    _barrier_flags(p)
    p.set_defaults(func=cmd_barrier_verify)
    p = b.add_parser("search", help="bisect for the admissible scale parameter")
    _common(p)
    _barrier_flags(p)
    p.add_argument("--param", choices=["M", "K", "sigma"])
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_barrier_search)

    d = top.add_parser("dirichlet", help="finite Dirichlet problems").add_subparsers(dest="command")
    p = d.add_parser("solve", help="solve Lu = f inside, u = g on the halo")
    _common(p)
    p.add_argument("--graph", help="graph family spec (JSON)")
    p.add_argument("--potential", help="potential spec (JSON)")
    p.add_argument("--boundary", help="constant or vertex_id,value CSV for the halo data")
    p.add_argument("--f", help="constant or vertex_id,value CSV for the interior data")
    p.add_argument("--method", choices=["auto", "cg", "direct"])
    p.set_defaults(func=cmd_dirichlet_solve)

    r = top.add_parser("radial", help="radial reduction on spherically symmetric trees").add_subparsers(dest="command")
    p = r.add_parser("solve", help="solve the radial Dirichlet problem")
    _common(p)
    p.add_argument("--branching")
    p.add_argument("--alpha", type=float)
    p.add_argument("--c0", type=float)
    p.add_argument("--boundary", type=float)
    p.add_argument("--radius", type=int)
    p.set_defaults(func=cmd_radial_solve)

    e = top.add_parser("experiment", help="exhaustion experiments").add_subparsers(dest="command")
    p = e.add_parser("exhaustion", help="probe values over increasing balls")
    _common(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--radii", type=_number, nargs="+")
    p.add_argument("--method", choices=["auto", "cg", "direct"])
    p.set_defaults(func=cmd_experiment_exhaustion)
    p = e.add_parser("phase-sweep", help="classify (branching, alpha) cells on trees")
    _common(p)
    p.add_argument("--branching", action="append")
    p.add_argument("--alpha", type=float, action="append")
    p.add_argument("--radii", type=int, nargs="+")
    p.add_argument("--gamma", type=float)
    p.add_argument("--c0", type=float)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_experiment_phase_sweep)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not getattr(args, "func", None):
        stderr.write(parser.format_usage() if not argv else parser.format_help())
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args, stdout)
    except UsageError as exc:
        stderr.write(f"plgraph: error: {exc}\n")
        return 2
    except (ParameterDomainError, SearchError, SolverError, MonotonicityError) as exc:
        stderr.write(f"plgraph: {type(exc).__name__}: {exc}\n")
        return 1
    except VerificationFailure as exc:
        stderr.write(f"plgraph: verification failed: {exc}\n")
        return 1
    except (ValueError, KeyError, OSError) as exc:
        stderr.write(f"plgraph: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
