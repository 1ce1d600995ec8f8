"""Nested-refinement convergence studies and invariant reporting.

Since no closed-form solution is available, errors are measured between
solutions on successive refinement levels: the coarse solution is
injected exactly into the fine space (nested meshes, so the injection is
the identity embedding of the same function) and the difference is
evaluated at the coarse time nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import FEFunction, norms
from .graph import DofMap
from .scenario import Scenario
from .stepping import POSITIVITY_TOL, Trace, simulate

MASS_DRIFT_TOL = 1e-10


class MeshNotNested(ValueError):
    pass


class MissingSnapshot(ValueError):
    pass


def nested_inject(coarse: FEFunction, fine_dofmap: DofMap) -> FEFunction:
    """Represent a coarse-mesh P1 function exactly on the refined mesh.

    Shared nodes copy their value; the new midpoint nodes take the
    average of their element endpoints.
    """
    coarse_mesh = coarse.dofmap.mesh
    fine_mesh = fine_dofmap.mesh
    if coarse_mesh.graph != fine_mesh.graph:
        raise MeshNotNested("meshes live on different graphs")
    if tuple(2 * n for n in coarse_mesh.counts) != fine_mesh.counts:
        raise MeshNotNested(
            f"fine counts {fine_mesh.counts} are not the doubling of {coarse_mesh.counts}"
        )
    values = np.empty(fine_dofmap.n_dofs)
    for i in range(len(coarse_mesh.graph.edges)):
        cv = coarse.edge_values(i)
        fd = fine_dofmap.edge_dofs[i]
        values[fd[0::2]] = cv
        values[fd[1::2]] = 0.5 * (cv[:-1] + cv[1:])
    return FEFunction(fine_dofmap, values)


def _match_snapshot(trace: Trace, t: float):
    for snap in trace.snapshots:
        if abs(snap.t - t) <= 1e-12 * max(1.0, abs(t)):
            return snap
    raise MissingSnapshot(f"no snapshot at t={t}")


def pair_error(fine: Trace, coarse: Trace, component: str = "u") -> tuple[float, float]:
    """Error between two traces on nested meshes, measured over coarse times.

    Returns (max-in-time L2 norm, L2-in-time full H1 norm) of the
    difference, with the time integral by composite trapezoid over the
    coarse snapshot times.
    """
    if component not in ("u", "c"):
        raise ValueError(f"component must be 'u' or 'c', got {component!r}")
    fine_dofmap = fine.dofmap
    times = []
    l2_values = []
    h1sq_values = []
    for snap_c in coarse.snapshots:
        snap_f = _match_snapshot(fine, snap_c.t)
        coarse_vals = getattr(snap_c, component)
        fine_vals = getattr(snap_f, component)
        injected = nested_inject(FEFunction(coarse.dofmap, coarse_vals), fine_dofmap)
        diff = norms(FEFunction(fine_dofmap, injected.values - fine_vals))
        times.append(snap_c.t)
        l2_values.append(diff.l2_norm)
        h1sq_values.append(diff.h1_norm ** 2)
    err_linf_l2 = max(l2_values)
    if len(times) > 1:
        err_l2_h1 = math.sqrt(np.trapezoid(h1sq_values, times))
    else:
        err_l2_h1 = 0.0
    return err_linf_l2, err_l2_h1


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    tau: float
    err_linf_l2: float
    err_l2_h1: float
    eoc_linf: float | None
    eoc_h1: float | None


def convergence_study(scenario: Scenario, levels: int) -> dict[str, list[ConvergenceRow]]:
    """Run levels+1 nested simulations and tabulate pairwise errors.

    Row k carries the coarse-level discretization (h, tau) of the pair
    (level k, level k+1); h and tau halve together per level.  EOC
    values compare consecutive rows.
    """
    if levels < 1:
        raise ValueError("at least one refinement level required")
    traces = []
    for k in range(levels + 1):
        scn_k = scenario.with_discretization(
            h=scenario.h / 2**k, tau=scenario.tau / 2**k, stride=1
        )
        traces.append(simulate(scn_k))

    tables: dict[str, list[ConvergenceRow]] = {}
    for component in ("u", "c"):
        rows: list[ConvergenceRow] = []
        prev: ConvergenceRow | None = None
        for k in range(levels):
            e_linf, e_h1 = pair_error(traces[k + 1], traces[k], component)
            eoc_linf = eoc_h1 = None
            if prev is not None:
                eoc_linf = math.log2(prev.err_linf_l2 / e_linf)
                eoc_h1 = math.log2(prev.err_l2_h1 / e_h1)
            row = ConvergenceRow(
                h=scenario.h / 2**k,
                tau=scenario.tau / 2**k,
                err_linf_l2=e_linf,
                err_l2_h1=e_h1,
                eoc_linf=eoc_linf,
                eoc_h1=eoc_h1,
            )
            rows.append(row)
            prev = row
        tables[component] = rows
    return tables


@dataclass(frozen=True)
class InvariantReport:
    influx_mode: bool
    max_mass_violation: float   # relative drift, or relative balance defect
    min_u: float
    min_c: float
    max_l2_u: float
    energy_u: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def invariant_report(trace: Trace) -> InvariantReport:
    """Check conservation (or influx balance) and positivity of a trace."""
    diags = trace.diagnostics
    failures: list[str] = []
    influx_mode = any(d.influx_u != 0.0 or d.influx_c != 0.0 for d in diags)
    tau = trace.scenario.tau

    max_violation = 0.0
    if influx_mode:
        for prev, cur in zip(diags, diags[1:]):
            defect = abs(cur.mass_u - prev.mass_u - tau * cur.influx_u)
            rel = defect / max(abs(cur.mass_u), 1e-300)
            if rel > max_violation:
                max_violation = rel
                if rel > MASS_DRIFT_TOL:
                    failures.append(
                        f"influx balance violated at t={cur.t}: relative defect {rel:.3e}"
                    )
    else:
        mass0 = diags[0].mass_u
        for cur in diags[1:]:
            rel = abs(cur.mass_u - mass0) / max(abs(mass0), 1e-300)
            if rel > max_violation:
                max_violation = rel
                if rel > MASS_DRIFT_TOL:
                    failures.append(f"mass drift at t={cur.t}: relative drift {rel:.3e}")

    min_u = min(d.min_u for d in diags)
    min_c = min(d.min_c for d in diags)
    for snap in trace.snapshots:
        min_u = min(min_u, float(snap.u.min()))
        min_c = min(min_c, float(snap.c.min()))
    if min_u < -POSITIVITY_TOL:
        failures.append(f"negative density: min nodal u = {min_u:.3e}")
    if min_c < -POSITIVITY_TOL:
        failures.append(f"negative attractant: min nodal c = {min_c:.3e}")
    if trace.error is not None:
        failures.append(trace.error)

    return InvariantReport(
        influx_mode=influx_mode,
        max_mass_violation=max_violation,
        min_u=min_u,
        min_c=min_c,
        max_l2_u=max(d.l2_u for d in diags),
        energy_u=diags[-1].energy_u,
        failures=tuple(failures),
    )
