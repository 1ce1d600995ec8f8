"""Positivity-preserving finite element solver for chemotaxis on metric graphs."""

from importlib import resources

from .assembly import FEFunction, lumped_mass, norms, quasi_interpolate, stiffness, upwind_convection
from .graph import MetricGraph, Mesh, DofMap, build_graph, dof_map, refine, uniform_mesh
from .linsolve import check_m_matrix, compose, factorize, solve
from .scenario import Scenario, format_scenario, parse_scenario, parse_scenario_text
from .stepping import SimState, Trace, init_state, simulate, step
from .study import convergence_study, invariant_report, nested_inject, pair_error

__all__ = [
    "FEFunction", "MetricGraph", "Mesh", "DofMap", "Scenario", "SimState", "Trace",
    "build_graph", "check_m_matrix", "compose", "convergence_study", "dof_map",
    "factorize", "format_scenario", "init_state", "invariant_report", "lumped_mass",
    "nested_inject", "norms", "pair_error", "parse_scenario", "parse_scenario_text",
    "quasi_interpolate", "refine", "simulate", "solve", "step", "stiffness",
    "uniform_mesh", "upwind_convection", "bundled_scenario",
]

__version__ = "0.1.0"


def bundled_scenario(name: str) -> str:
    """Path to a scenario file shipped with the package (tripod, block)."""
    path = resources.files(__package__) / "scenarios" / f"{name}.scn"
    return str(path)
