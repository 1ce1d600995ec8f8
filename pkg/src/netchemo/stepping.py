"""Implicit Euler time stepping for the chemotaxis system on a network.

Each step solves two linear systems: first the density update with the
upwind convection matrix frozen at the previous attractant field,

    [(1/tau) M(1) + K(alpha) - C] u_new = (1/tau) M(1) u_old + influx_u,

then the attractant update driven by the fresh density,

    [(1/tau) M(1) + K(beta) + M(gamma)] c_new
        = (1/tau) M(1) c_old + M(delta) u_new + influx_c.

Both matrices are M-matrices for every tau > 0, so nonnegative states
stay nonnegative and, without influx, the total density integral is
conserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import linsolve
from .assembly import FEFunction, lumped_mass, norms, quasi_interpolate, stiffness, upwind_convection
from .graph import DofMap, dof_map, uniform_mesh
from .scenario import Scenario, validate_scenario

# nodal values in (-POSITIVITY_TOL, 0) are roundoff and get clamped;
# anything below is a genuine violation
POSITIVITY_TOL = 1e-13


class PositivityViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class SimState:
    n: int
    t: float
    u: FEFunction
    c: FEFunction


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass_u: float
    mass_c: float
    min_u: float
    min_c: float
    l2_u: float
    h1semi_c: float
    energy_u: float       # cumulative sum of tau * |grad u|^2 up to this step
    influx_u: float       # total influx added to the u equation this step
    influx_c: float


@dataclass(frozen=True)
class Snapshot:
    t: float
    u: np.ndarray
    c: np.ndarray


@dataclass
class Trace:
    scenario: Scenario
    dofmap: DofMap
    snapshots: list[Snapshot] = field(default_factory=list)
    diagnostics: list[DiagnosticsRecord] = field(default_factory=list)
    error: str | None = None


class StepOperators:
    """Time-independent operators of one discretization, assembled once."""

    def __init__(self, scenario: Scenario, dofmap: DofMap):
        self.dofmap = dofmap
        self.tau = scenario.tau
        self.chi = np.array(scenario.params.chi)
        self.m1 = lumped_mass(dofmap, 1.0)
        self.m_delta = lumped_mass(dofmap, scenario.params.delta)
        self.k_alpha = stiffness(dofmap, scenario.params.alpha)
        m_gamma = lumped_mass(dofmap, scenario.params.gamma)
        self.s_c = linsolve.compose(
            self.m1,
            scenario.tau,
            [(+1, stiffness(dofmap, scenario.params.beta)), (+1, sp.diags(m_gamma).tocsr())],
        )
        self.s_c_factor = linsolve.factorize(self.s_c)
        # influx laws resolved to DOF indices
        self.influx_u = [
            (dofmap.vertex_dof[v], bc.influx_u)
            for v, bc in scenario.boundary.items()
            if bc.influx_u is not None
        ]
        self.influx_c = [
            (dofmap.vertex_dof[v], bc.influx_c)
            for v, bc in scenario.boundary.items()
            if bc.influx_c is not None
        ]


def init_state(scenario: Scenario, dofmap: DofMap) -> SimState:
    """Quasi-interpolate the initial expressions onto the mesh."""
    u0 = quasi_interpolate(dofmap, scenario.initial_u)
    c0 = quasi_interpolate(dofmap, scenario.initial_c)
    return SimState(n=0, t=0.0, u=u0, c=c0)


def boundary_influx(state: SimState, ops: StepOperators):
    """Lagged boundary influx contributions for the next step.

    Laws are evaluated at the previous trace values, which keeps each
    step linear and preserves the M-matrix structure.  Returns the two
    additive right-hand-side vectors and the total rates.
    """
    n = ops.dofmap.n_dofs
    rhs_u = np.zeros(n)
    rhs_c = np.zeros(n)
    for dof, law in ops.influx_u:
        rhs_u[dof] += law(state.u.values[dof])
    for dof, law in ops.influx_c:
        rhs_c[dof] += law(state.c.values[dof])
    return rhs_u, rhs_c, float(rhs_u.sum()), float(rhs_c.sum())


def step(state: SimState, ops: StepOperators) -> tuple[SimState, float, float]:
    """Advance one implicit Euler step; returns (state, influx_u, influx_c)."""
    tau = ops.tau
    dofmap = ops.dofmap
    add_u, add_c, total_u, total_c = boundary_influx(state, ops)

    conv = upwind_convection(dofmap, ops.chi, state.c)
    s_u = linsolve.compose(ops.m1, tau, [(+1, ops.k_alpha), (-1, conv)])
    rhs_u = ops.m1 * state.u.values / tau + add_u
    u_new = linsolve.factorize(s_u).solve(rhs_u)

    rhs_c = ops.m1 * state.c.values / tau + ops.m_delta * u_new + add_c
    c_new = ops.s_c_factor.solve(rhs_c)

    return (
        SimState(state.n + 1, (state.n + 1) * tau, FEFunction(dofmap, u_new), FEFunction(dofmap, c_new)),
        total_u,
        total_c,
    )


def _clamp_roundoff(values: np.ndarray) -> np.ndarray:
    """Zero out negative values within roundoff of zero; real violations stay."""
    out = values.copy()
    mask = (out < 0.0) & (out > -POSITIVITY_TOL)
    out[mask] = 0.0
    return out


def _diagnostics(state: SimState, energy_u: float, influx_u: float, influx_c: float) -> DiagnosticsRecord:
    nu = norms(state.u)
    nc = norms(state.c)
    return DiagnosticsRecord(
        t=state.t,
        mass_u=nu.total_mass,
        mass_c=nc.total_mass,
        min_u=float(state.u.values.min()),
        min_c=float(state.c.values.min()),
        l2_u=nu.l2_norm,
        h1semi_c=nc.h1_seminorm,
        energy_u=energy_u,
        influx_u=influx_u,
        influx_c=influx_c,
    )


def simulate(scenario: Scenario, check_positivity: bool = True) -> Trace:
    """Run the full time loop; returns a trace with snapshots and diagnostics.

    A positivity violation or a solver failure aborts the run; the trace
    keeps everything computed so far and records the error message.
    """
    validate_scenario(scenario)
    mesh = uniform_mesh(scenario.graph, scenario.h)
    dofmap = dof_map(mesh)
    n_steps = scenario.n_steps
    stride = scenario.effective_stride

    state = init_state(scenario, dofmap)
    ops = StepOperators(scenario, dofmap)
    trace = Trace(scenario=scenario, dofmap=dofmap)
    trace.snapshots.append(Snapshot(0.0, state.u.values.copy(), state.c.values.copy()))
    energy = 0.0
    trace.diagnostics.append(_diagnostics(state, energy, 0.0, 0.0))

    for n in range(1, n_steps + 1):
        try:
            state, influx_u, influx_c = step(state, ops)
        except Exception as exc:  # propagate after recording the partial trace
            trace.error = f"step {n}: {exc}"
            raise
        energy += scenario.tau * norms(state.u).h1_seminorm ** 2
        min_val = min(state.u.values.min(), state.c.values.min())
        if check_positivity and min_val < -POSITIVITY_TOL:
            trace.error = f"step {n}: positivity violated, min nodal value {min_val:.3e}"
            trace.diagnostics.append(_diagnostics(state, energy, influx_u, influx_c))
            raise PositivityViolation(trace.error)
        state = SimState(
            state.n,
            state.t,
            FEFunction(dofmap, _clamp_roundoff(state.u.values)),
            FEFunction(dofmap, _clamp_roundoff(state.c.values)),
        )
        trace.diagnostics.append(_diagnostics(state, energy, influx_u, influx_c))
        if n % stride == 0:
            trace.snapshots.append(Snapshot(state.t, state.u.values.copy(), state.c.values.copy()))
    return trace
