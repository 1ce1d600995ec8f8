"""Command line interface: simulate, converge, check.

`simulate` writes snapshots.csv and diagnostics.csv (plus rendered
figures) to the output directory, `converge` writes the per-component
convergence tables, and `check` verifies the structural invariants of a
run.  Exit codes: 0 success, 1 error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import plots
from .scenario import ScenarioError, parse_scenario
from .stepping import PositivityViolation, Trace, simulate
from .study import convergence_study, invariant_report


def _sig6(x: float) -> str:
    return f"{x:.6g}"


def write_snapshots_csv(trace: Trace, path: str) -> None:
    dofmap = trace.dofmap
    mesh = dofmap.mesh
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "edge", "x", "u", "c"])
        for snap in trace.snapshots:
            for i, edge in enumerate(mesh.graph.edges):
                dofs = dofmap.edge_dofs[i]
                for x, u, c in zip(mesh.node_coords(i), snap.u[dofs], snap.c[dofs]):
                    writer.writerow([repr(snap.t), edge.id, repr(float(x)), repr(float(u)), repr(float(c))])


def write_diagnostics_csv(trace: Trace, path: str) -> None:
    fields = [
        "time", "mass_u", "mass_c", "min_u", "min_c",
        "l2_u", "h1semi_c", "energy_u", "influx_u", "influx_c",
    ]
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for d in trace.diagnostics:
            writer.writerow([
                repr(d.t), repr(d.mass_u), repr(d.mass_c), repr(d.min_u), repr(d.min_c),
                repr(d.l2_u), repr(d.h1semi_c), repr(d.energy_u), repr(d.influx_u), repr(d.influx_c),
            ])


def write_convergence_csv(rows, path: str) -> None:
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["h", "tau", "err_linf_l2", "eoc", "err_l2_h1", "eoc"])
        for r in rows:
            writer.writerow([
                repr(r.h), repr(r.tau),
                repr(r.err_linf_l2), "" if r.eoc_linf is None else repr(r.eoc_linf),
                repr(r.err_l2_h1), "" if r.eoc_h1 is None else repr(r.eoc_h1),
            ])


def print_convergence_table(tables) -> None:
    for component, rows in tables.items():
        print(f"\n{component}: errors between successive refinement levels")
        print(f"{'h':>12} {'tau':>12} {'Linf(L2)':>12} {'eoc':>6} {'L2(H1)':>12} {'eoc':>6}")
        for r in rows:
            eoc1 = "--" if r.eoc_linf is None else f"{r.eoc_linf:.2f}"
            eoc2 = "--" if r.eoc_h1 is None else f"{r.eoc_h1:.2f}"
            print(
                f"{_sig6(r.h):>12} {_sig6(r.tau):>12} "
                f"{_sig6(r.err_linf_l2):>12} {eoc1:>6} {_sig6(r.err_l2_h1):>12} {eoc2:>6}"
            )


def cmd_simulate(args) -> int:
    scenario = parse_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    try:
        trace = simulate(scenario)
    except PositivityViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    write_snapshots_csv(trace, os.path.join(args.out, "snapshots.csv"))
    write_diagnostics_csv(trace, os.path.join(args.out, "diagnostics.csv"))
    if args.figures:
        plots.plot_snapshots(trace, args.out)
        plots.plot_diagnostics(trace, args.out)
    report = invariant_report(trace)
    last = trace.diagnostics[-1]
    print(f"steps: {scenario.n_steps}  dofs: {trace.dofmap.n_dofs}  snapshots: {len(trace.snapshots)}")
    print(f"final t={_sig6(last.t)}: mass_u={_sig6(last.mass_u)} mass_c={_sig6(last.mass_c)} "
          f"min_u={_sig6(report.min_u)} min_c={_sig6(report.min_c)}")
    if not report.passed:
        for failure in report.failures:
            print(f"invariant violation: {failure}", file=sys.stderr)
        return 2
    return 0


def cmd_converge(args) -> int:
    if args.levels < 2:
        print("converge requires --levels >= 2", file=sys.stderr)
        return 1
    scenario = parse_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    tables = convergence_study(scenario, args.levels)
    write_convergence_csv(tables["u"], os.path.join(args.out, "convergence_u.csv"))
    write_convergence_csv(tables["c"], os.path.join(args.out, "convergence_c.csv"))
    if args.figures:
        plots.plot_convergence(tables, args.out)
    print_convergence_table(tables)
    return 0


def cmd_check(args) -> int:
    scenario = parse_scenario(args.scenario)
    try:
        trace = simulate(scenario)
    except PositivityViolation as exc:
        print(f"FAIL positivity: {exc}")
        return 2
    report = invariant_report(trace)
    mode = "influx balance" if report.influx_mode else "mass conservation"
    mass_ok = report.max_mass_violation <= 1e-10
    pos_ok = report.min_u >= -1e-13 and report.min_c >= -1e-13
    print(f"{'PASS' if mass_ok else 'FAIL'} {mode}: max relative defect {report.max_mass_violation:.3e}")
    print(f"{'PASS' if pos_ok else 'FAIL'} positivity: min_u={report.min_u:.3e} min_c={report.min_c:.3e}")
    print(f"INFO bounded energies: max |u|_L2 = {_sig6(report.max_l2_u)}, "
          f"sum tau*|grad u|^2 = {_sig6(report.energy_u)}")
    for failure in report.failures:
        print(f"FAIL {failure}")
    return 0 if report.passed and mass_ok and pos_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netchemo",
        description="Positivity-preserving chemotaxis simulation on metric graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write CSV output")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--no-figures", dest="figures", action="store_false")
    p_sim.set_defaults(func=cmd_simulate)

    p_conv = sub.add_parser("converge", help="nested-refinement convergence study")
    p_conv.add_argument("scenario")
    p_conv.add_argument("--levels", type=int, required=True)
    p_conv.add_argument("--out", required=True)
    p_conv.add_argument("--no-figures", dest="figures", action="store_false")
    p_conv.set_defaults(func=cmd_converge)

    p_check = sub.add_parser("check", help="verify conservation and positivity invariants")
    p_check.add_argument("scenario")
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
