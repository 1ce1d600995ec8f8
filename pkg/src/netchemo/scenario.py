"""Scenario definition and the plain-text scenario file format.

A scenario file has bracketed sections::

    [graph]
    vertex v1
    edge e1 v1 v4 length=1
    [params]
    * alpha=1 beta=0.1 gamma=1 delta=1 chi=1
    [initial]
    * u="4" c="0"
    e3 u="4" c="1-cos(pi*x)"
    [boundary]
    v1 influx_u="2/(1+w)"
    [discretization]
    h=0.0625 tau=0.0078125 t_end=1
    [output]
    stride=13

Params and initial lines accept an edge id or `*` as the default for
all edges; specific lines override the default.  Boundary conditions
default to zero flux; influx laws are expressions in the trace value w.
"""

from __future__ import annotations

import math
import shlex
import warnings
from dataclasses import dataclass, field, replace

from . import expr
from .graph import MetricGraph, build_graph


class ScenarioError(ValueError):
    pass


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ScenarioError):
    pass


@dataclass(frozen=True)
class EdgeParams:
    """Per-edge constant model coefficients, aligned with graph.edges.

    alpha, beta: diffusivities of the density and the attractant (> 0);
    gamma: attractant decay (>= 0); delta: attractant production (>= 0);
    chi: chemotactic sensitivity.
    """

    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    delta: tuple[float, ...]
    chi: tuple[float, ...]


@dataclass(frozen=True)
class Influx:
    """Boundary influx laws at one vertex; None means zero flux for that field."""

    influx_u: expr.Expression | None = None
    influx_c: expr.Expression | None = None


@dataclass(frozen=True)
class Scenario:
    graph: MetricGraph
    params: EdgeParams
    initial_u: tuple[expr.Expression, ...]
    initial_c: tuple[expr.Expression, ...]
    boundary: dict[str, Influx] = field(default_factory=dict)
    h: float = 0.1
    tau: float = 0.01
    t_end: float = 1.0
    stride: int | None = None

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.tau))

    @property
    def effective_stride(self) -> int:
        if self.stride is not None:
            return self.stride
        return max(1, math.ceil(self.n_steps / 10))

    def with_discretization(self, h: float, tau: float, stride: int | None = None) -> "Scenario":
        return replace(self, h=h, tau=tau, stride=stride)


def validate_scenario(scn: Scenario) -> None:
    """Raise ValidationError for structural problems; warn on negative data."""
    n_edges = len(scn.graph.edges)
    for name in ("alpha", "beta", "gamma", "delta", "chi"):
        vals = getattr(scn.params, name)
        if len(vals) != n_edges:
            raise ValidationError(f"{name}: expected {n_edges} per-edge values")
    if min(scn.params.alpha) <= 0 or min(scn.params.beta) <= 0:
        raise ValidationError("diffusivities alpha and beta must be strictly positive")
    if min(scn.params.gamma) < 0 or min(scn.params.delta) < 0:
        raise ValidationError("gamma and delta must be nonnegative")
    if len(scn.initial_u) != n_edges or len(scn.initial_c) != n_edges:
        raise ValidationError("one initial expression per edge required for u and c")
    if not scn.h > 0:
        raise ValidationError(f"mesh size h={scn.h} must be positive")
    if not scn.tau > 0:
        raise ValidationError(f"time step tau={scn.tau} must be positive")
    if scn.t_end < 0:
        raise ValidationError(f"end time t_end={scn.t_end} must be nonnegative")
    n = round(scn.t_end / scn.tau)
    if abs(scn.t_end - n * scn.tau) > 1e-9:
        raise ValidationError(
            f"t_end={scn.t_end} is not an integer multiple of tau={scn.tau}"
        )
    if scn.stride is not None and scn.stride < 1:
        raise ValidationError("snapshot stride must be >= 1")

    boundary_set = set(scn.graph.boundary_vertices)
    for v in scn.boundary:
        if v not in scn.graph.vertices:
            raise ValidationError(f"boundary condition at unknown vertex {v!r}")
        if v not in boundary_set:
            raise ValidationError(f"influx at interior vertex {v!r}; only degree-1 vertices allowed")

    # nonnegative initial data is an assumption of the scheme, not a hard error
    for i, edge in enumerate(scn.graph.edges):
        xs = [j * edge.length / 16 for j in range(17)]
        for name, exprs in (("u", scn.initial_u), ("c", scn.initial_c)):
            if min(exprs[i](x) for x in xs) < 0:
                warnings.warn(
                    f"initial {name} on edge {edge.id!r} takes negative values; "
                    "positivity of the scheme is only guaranteed for nonnegative data",
                    stacklevel=2,
                )


# --- parsing -----------------------------------------------------------------

_SECTIONS = ("graph", "params", "initial", "boundary", "discretization", "output")
_PARAM_KEYS = ("alpha", "beta", "gamma", "delta", "chi")


def _split_kv(token: str, line_no: int) -> tuple[str, str]:
    if "=" not in token:
        raise ScenarioSyntaxError(f"expected key=value, got {token!r}", line_no)
    key, _, value = token.partition("=")
    return key, value


def _parse_float(text: str, line_no: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioSyntaxError(f"bad number {text!r}", line_no) from None


def parse_scenario_text(text: str) -> Scenario:
    section = None
    vertices: list[str] = []
    edge_descs: list[tuple[str, str, str, float]] = []
    param_lines: list[tuple[str, dict, int]] = []
    initial_lines: list[tuple[str, dict, int]] = []
    boundary: dict[str, Influx] = {}
    disc: dict[str, float] = {}
    stride: int | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip()
            if name not in _SECTIONS:
                raise ScenarioSyntaxError(f"unknown section [{name}]", line_no)
            section = name
            continue
        if section is None:
            raise ScenarioSyntaxError("content before the first section header", line_no)
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise ScenarioSyntaxError(str(exc), line_no) from None

        if section == "graph":
            if tokens[0] == "vertex" and len(tokens) == 2:
                vertices.append(tokens[1])
            elif tokens[0] == "edge" and len(tokens) == 5:
                key, value = _split_kv(tokens[4], line_no)
                if key != "length":
                    raise ScenarioSyntaxError(f"unknown edge attribute {key!r}", line_no)
                edge_descs.append((tokens[1], tokens[2], tokens[3], _parse_float(value, line_no)))
            else:
                raise ScenarioSyntaxError(f"expected 'vertex <id>' or 'edge <id> <tail> <head> length=<r>'", line_no)

        elif section == "params":
            target, kvs = tokens[0], {}
            for token in tokens[1:]:
                key, value = _split_kv(token, line_no)
                if key not in _PARAM_KEYS:
                    raise ScenarioSyntaxError(f"unknown parameter {key!r}", line_no)
                kvs[key] = _parse_float(value, line_no)
            missing = [k for k in _PARAM_KEYS if k not in kvs]
            if missing:
                raise ScenarioSyntaxError(f"missing parameters {missing}", line_no)
            param_lines.append((target, kvs, line_no))

        elif section == "initial":
            target, kvs = tokens[0], {}
            for token in tokens[1:]:
                key, value = _split_kv(token, line_no)
                if key not in ("u", "c"):
                    raise ScenarioSyntaxError(f"unknown initial field {key!r}", line_no)
                try:
                    kvs[key] = expr.parse(value, variable="x")
                except expr.ExpressionError as exc:
                    raise ScenarioSyntaxError(f"bad expression for {key}: {exc}", line_no) from None
            if set(kvs) != {"u", "c"}:
                raise ScenarioSyntaxError("initial line must set both u=\"...\" and c=\"...\"", line_no)
            initial_lines.append((target, kvs, line_no))

        elif section == "boundary":
            vertex, kvs = tokens[0], {}
            for token in tokens[1:]:
                key, value = _split_kv(token, line_no)
                if key not in ("influx_u", "influx_c"):
                    raise ScenarioSyntaxError(f"unknown boundary key {key!r}", line_no)
                try:
                    kvs[key] = expr.parse(value, variable="w")
                except expr.ExpressionError as exc:
                    raise ScenarioSyntaxError(f"bad expression for {key}: {exc}", line_no) from None
            if not kvs:
                raise ScenarioSyntaxError("boundary line without influx law", line_no)
            if vertex in boundary:
                raise ScenarioSyntaxError(f"duplicate boundary condition at {vertex!r}", line_no)
            boundary[vertex] = Influx(kvs.get("influx_u"), kvs.get("influx_c"))

        elif section == "discretization":
            for token in tokens:
                key, value = _split_kv(token, line_no)
                if key not in ("h", "tau", "t_end"):
                    raise ScenarioSyntaxError(f"unknown discretization key {key!r}", line_no)
                disc[key] = _parse_float(value, line_no)

        elif section == "output":
            for token in tokens:
                key, value = _split_kv(token, line_no)
                if key != "stride":
                    raise ScenarioSyntaxError(f"unknown output key {key!r}", line_no)
                try:
                    stride = int(value)
                except ValueError:
                    raise ScenarioSyntaxError(f"bad stride {value!r}", line_no) from None

    graph = build_graph(vertices, edge_descs)
    edge_ids = [e.id for e in graph.edges]

    def resolve(lines, what):
        default = None
        specific = {}
        for target, kvs, line_no in lines:
            if target == "*":
                default = kvs
            elif target in edge_ids:
                specific[target] = kvs
            else:
                raise ScenarioSyntaxError(f"{what} for unknown edge {target!r}", line_no)
        resolved = []
        for eid in edge_ids:
            kvs = specific.get(eid, default)
            if kvs is None:
                raise ValidationError(f"no {what} given for edge {eid!r} and no '*' default")
            resolved.append(kvs)
        return resolved

    params = resolve(param_lines, "params")
    initial = resolve(initial_lines, "initial data")

    for key in ("h", "tau", "t_end"):
        if key not in disc:
            raise ValidationError(f"[discretization] must set {key}")

    scn = Scenario(
        graph=graph,
        params=EdgeParams(**{k: tuple(p[k] for p in params) for k in _PARAM_KEYS}),
        initial_u=tuple(p["u"] for p in initial),
        initial_c=tuple(p["c"] for p in initial),
        boundary=boundary,
        h=disc["h"],
        tau=disc["tau"],
        t_end=disc["t_end"],
        stride=stride,
    )
    validate_scenario(scn)
    return scn


def parse_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


def _fmt(x: float) -> str:
    return repr(float(x))


def format_scenario(scn: Scenario) -> str:
    """Serialize a scenario; parsing the result reproduces it exactly."""
    lines = ["[graph]"]
    lines += [f"vertex {v}" for v in scn.graph.vertices]
    lines += [f"edge {e.id} {e.tail} {e.head} length={_fmt(e.length)}" for e in scn.graph.edges]
    lines.append("[params]")
    for i, e in enumerate(scn.graph.edges):
        kv = " ".join(f"{k}={_fmt(getattr(scn.params, k)[i])}" for k in _PARAM_KEYS)
        lines.append(f"{e.id} {kv}")
    lines.append("[initial]")
    for i, e in enumerate(scn.graph.edges):
        lines.append(f'{e.id} u="{scn.initial_u[i].format()}" c="{scn.initial_c[i].format()}"')
    if scn.boundary:
        lines.append("[boundary]")
        for v, bc in scn.boundary.items():
            parts = [v]
            if bc.influx_u is not None:
                parts.append(f'influx_u="{bc.influx_u.format()}"')
            if bc.influx_c is not None:
                parts.append(f'influx_c="{bc.influx_c.format()}"')
            lines.append(" ".join(parts))
    lines.append("[discretization]")
    lines.append(f"h={_fmt(scn.h)} tau={_fmt(scn.tau)} t_end={_fmt(scn.t_end)}")
    if scn.stride is not None:
        lines.append("[output]")
        lines.append(f"stride={scn.stride}")
    return "\n".join(lines) + "\n"
