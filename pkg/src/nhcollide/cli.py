"""Command-line entry points.

Subcommands:
  simulate    --scene <path> --out <path> --events <path> [--t-max s] [--dt s]
  impact-map  --metric <path> --constraint-a <path> --constraint-b <path> --mu <x>
  validate    --scene <path>

Exit codes: 0 success, 2 schema/validation failure, 3 numerical failure.
"""

import argparse
import sys as _sys
import warnings

import numpy as np

from .checks import run_scene_checks
from .errors import (
    BisectionStall,
    GrazingImpact,
    InadmissiblePreVelocity,
    MuOutOfRange,
    NestingViolated,
    RankDeficient,
    SchemaError,
    SingularGram,
    SingularKKT,
)
from .geometry import ConstraintMatrix, Metric, empty_constraint, g_projector, impact_matrix, kernel_basis
from .sceneio import build_system, make_settings, parse_scene
from .simulate import STATUS_COMPLETED, STATUS_ZENO_CAP, audit, simulate

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3

_SCHEMA_ERRORS = (SchemaError, MuOutOfRange, ValueError, OSError)
_NUMERICAL_ERRORS = (RankDeficient, SingularGram, NestingViolated, SingularKKT,
                     BisectionStall, GrazingImpact, InadmissiblePreVelocity)


def _print_matrix(name, m, out):
    out.write(f"{name} =\n")
    for row in np.atleast_2d(m):
        out.write(" ".join(format(float(c), ".17g") for c in row) + "\n")


def cmd_simulate(args, out=None):
    out = out or _sys.stdout
    cfg = parse_scene(args.scene)
    if args.t_max is not None:
        cfg.t_max = float(args.t_max)
    if args.dt is not None:
        if args.dt <= 0:
            raise SchemaError("dt", "must be positive")
        cfg.integrator["dt"] = float(args.dt)
    system, initial = build_system(cfg)
    settings = make_settings(cfg)
    traj = simulate(system, initial, cfg.t_max, settings)

    from .sceneio import write_events_table, write_trajectory_table
    write_trajectory_table(traj, args.out)
    write_events_table(traj, args.events)

    report = audit(traj)
    out.write(f"status: {traj.status}\n")
    if traj.message:
        out.write(f"detail: {traj.message}\n")
    out.write(f"events: {len(traj.events)}\n")
    out.write(report.summary() + "\n")
    if traj.status in (STATUS_COMPLETED, STATUS_ZENO_CAP):
        return EXIT_OK
    return EXIT_NUMERICAL


def _load_matrix(path):
    # an empty file is a valid way to say "no constraint rows"
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*no data.*")
        return np.loadtxt(path, ndmin=2)


def cmd_impact_map(args, out=None):
    out = out or _sys.stdout
    g_entries = _load_matrix(args.metric)
    a_entries = _load_matrix(args.constraint_a)
    b_entries = _load_matrix(args.constraint_b)
    metric = Metric(g_entries)
    n = metric.n
    a = empty_constraint(n) if a_entries.size == 0 else ConstraintMatrix(a_entries)
    b = ConstraintMatrix(b_entries)

    p = g_projector(metric, b)
    r = impact_matrix(metric, a, b, args.mu)
    _print_matrix("P", p.entries, out)
    _print_matrix("R", r.entries, out)

    out.write("nesting: pass\n")  # impact_matrix would have raised otherwise
    idem = np.abs(p.entries @ p.entries - p.entries).max()
    out.write(f"idempotency |P^2-P|_max = {idem:.3e}\n")
    z = kernel_basis(b).cols
    if z.size:
        ident = np.abs(r.entries @ z - z).max()
        out.write(f"identity on ker B |R Z - Z|_max = {ident:.3e}\n")
    else:
        out.write("ker B is trivial\n")
    if args.mu == 1.0:
        invol = np.abs(r.entries @ r.entries - np.eye(n)).max()
        out.write(f"involution |R^2-I|_max = {invol:.3e}\n")
    return EXIT_OK


def cmd_validate(args, out=None):
    out = out or _sys.stdout
    cfg = parse_scene(args.scene)
    system, initial = build_system(cfg)
    results = run_scene_checks(system, initial.x, cfg.mu)
    if not results:
        out.write("no wall declared; nothing to validate beyond construction\n")
        return EXIT_OK
    ok = True
    for res in results:
        out.write(res.line() + "\n")
        ok = ok and res.passed
    return EXIT_OK if ok else EXIT_SCHEMA


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nhcollide",
        description="Nonholonomic systems with walls: impact maps and "
                    "event-driven simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scene and write tables")
    p_sim.add_argument("--scene", required=True)
    p_sim.add_argument("--out", required=True, help="trajectory table path")
    p_sim.add_argument("--events", required=True, help="events table path")
    p_sim.add_argument("--t-max", type=float, default=None)
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_imp = sub.add_parser("impact-map", help="print P and R for given G, A, B")
    p_imp.add_argument("--metric", required=True)
    p_imp.add_argument("--constraint-a", required=True)
    p_imp.add_argument("--constraint-b", required=True)
    p_imp.add_argument("--mu", type=float, default=1.0)
    p_imp.set_defaults(func=cmd_impact_map)

    p_val = sub.add_parser("validate", help="run the scene invariant suite")
    p_val.add_argument("--scene", required=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        _sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except _SCHEMA_ERRORS as exc:
        _sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_SCHEMA


if __name__ == "__main__":
    _sys.exit(main())
