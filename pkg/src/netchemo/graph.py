"""Directed metric graphs, uniform edge meshes, and global DOF maps.

Edges are identified with intervals [0, length], oriented from tail to
head.  The incidence sign is -1 at the tail and +1 at the head.  Graph
vertices carry a single degree of freedom shared by all incident edges,
which makes continuity across junctions structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Invalid metric graph data."""


class NonpositiveLength(GraphError):
    """An edge was declared with length <= 0."""


class DanglingEndpoint(GraphError):
    """An edge references an undeclared vertex."""


class DisconnectedGraph(GraphError):
    """The graph is not connected."""


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: float


@dataclass(frozen=True)
class MetricGraph:
    """Validated directed graph with positive edge lengths."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in (e.tail, e.head))

    @property
    def boundary_vertices(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.degree(v) == 1)

    @property
    def interior_vertices(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.degree(v) >= 2)

    def incidence_sign(self, edge: Edge, v: str) -> int:
        if v == edge.tail:
            return -1
        if v == edge.head:
            return +1
        raise KeyError(f"vertex {v!r} is not an endpoint of edge {edge.id!r}")

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)


def build_graph(vertex_ids, edge_descriptors) -> MetricGraph:
    """Build and validate a metric graph.

    Parameters
    ----------
    vertex_ids : iterable of str
        Declared vertex identifiers, order fixes DOF numbering.
    edge_descriptors : iterable of (id, tail, head, length)

    Raises
    ------
    NonpositiveLength, DanglingEndpoint, DisconnectedGraph
    """
    vertices = tuple(str(v) for v in vertex_ids)
    vset = set(vertices)
    if len(vset) != len(vertices):
        raise GraphError("duplicate vertex identifiers")

    edges = []
    for eid, tail, head, length in edge_descriptors:
        if tail not in vset:
            raise DanglingEndpoint(f"edge {eid!r}: undeclared tail vertex {tail!r}")
        if head not in vset:
            raise DanglingEndpoint(f"edge {eid!r}: undeclared head vertex {head!r}")
        length = float(length)
        if not length > 0.0:
            raise NonpositiveLength(f"edge {eid!r}: length {length} must be positive")
        edges.append(Edge(str(eid), tail, head, length))
    if len({e.id for e in edges}) != len(edges):
        raise GraphError("duplicate edge identifiers")
    if not edges and len(vertices) > 1:
        raise DisconnectedGraph("no edges connecting the declared vertices")

    # connectivity by breadth-first search over the undirected skeleton
    if vertices:
        adj: dict[str, list[str]] = {v: [] for v in vertices}
        for e in edges:
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
        seen = {vertices[0]}
        queue = [vertices[0]]
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(vertices):
            missing = sorted(vset - seen)
            raise DisconnectedGraph(f"vertices unreachable from {vertices[0]!r}: {missing}")

    return MetricGraph(vertices, tuple(edges))


@dataclass(frozen=True)
class Mesh:
    """Uniform subdivision of every edge of a metric graph."""

    graph: MetricGraph
    counts: tuple[int, ...]  # elements per edge, aligned with graph.edges

    def __post_init__(self):
        if len(self.counts) != len(self.graph.edges):
            raise GraphError("one element count per edge required")
        if any(n < 1 for n in self.counts):
            raise GraphError("element counts must be >= 1")

    def element_size(self, edge_index: int) -> float:
        return self.graph.edges[edge_index].length / self.counts[edge_index]

    @property
    def h(self) -> float:
        return max(self.element_size(i) for i in range(len(self.counts)))

    def node_coords(self, edge_index: int) -> np.ndarray:
        """Node coordinates on one edge, tail (x=0) to head (x=length)."""
        n = self.counts[edge_index]
        length = self.graph.edges[edge_index].length
        return np.arange(n + 1) * (length / n)


def uniform_mesh(graph: MetricGraph, target_h: float) -> Mesh:
    """Mesh with N_e = ceil(length/target_h) elements per edge, so h <= target_h."""
    if not target_h > 0:
        raise GraphError(f"target mesh size {target_h} must be positive")
    counts = tuple(max(1, math.ceil(e.length / target_h - 1e-12)) for e in graph.edges)
    return Mesh(graph, counts)


def refine(mesh: Mesh) -> Mesh:
    """Double every element count; coarse nodes are nested in the fine mesh."""
    return Mesh(mesh.graph, tuple(2 * n for n in mesh.counts))


@dataclass(frozen=True)
class DofMap:
    """Global numbering of graph vertices and interior mesh nodes.

    Graph vertices come first in declaration order, then interior nodes
    edge by edge.  `edge_dofs[i]` lists the global indices of the nodes
    of edge i from tail to head (length counts[i]+1).  The flat element
    arrays (`elem_*`) drive vectorized assembly.
    """

    mesh: Mesh
    n_dofs: int
    vertex_dof: dict[str, int]
    edge_dofs: tuple[np.ndarray, ...]
    elem_tail: np.ndarray = field(repr=False)   # global dof of element left node
    elem_head: np.ndarray = field(repr=False)   # global dof of element right node
    elem_h: np.ndarray = field(repr=False)      # element sizes
    elem_edge: np.ndarray = field(repr=False)   # edge index per element

    @property
    def n_elements(self) -> int:
        return len(self.elem_h)


def dof_map(mesh: Mesh) -> DofMap:
    """Build the global DOF map with shared vertex DOFs."""
    graph = mesh.graph
    vertex_dof = {v: i for i, v in enumerate(graph.vertices)}
    next_dof = len(graph.vertices)

    edge_dofs = []
    for i, e in enumerate(graph.edges):
        n = mesh.counts[i]
        dofs = np.empty(n + 1, dtype=np.int64)
        dofs[0] = vertex_dof[e.tail]
        dofs[-1] = vertex_dof[e.head]
        dofs[1:n] = np.arange(next_dof, next_dof + n - 1)
        next_dof += n - 1
        edge_dofs.append(dofs)

    elem_tail = np.concatenate([d[:-1] for d in edge_dofs])
    elem_head = np.concatenate([d[1:] for d in edge_dofs])
    elem_h = np.concatenate(
        [np.full(mesh.counts[i], mesh.element_size(i)) for i in range(len(graph.edges))]
    )
    elem_edge = np.concatenate(
        [np.full(mesh.counts[i], i, dtype=np.int64) for i in range(len(graph.edges))]
    )
    return DofMap(
        mesh=mesh,
        n_dofs=next_dof,
        vertex_dof=vertex_dof,
        edge_dofs=tuple(edge_dofs),
        elem_tail=elem_tail,
        elem_head=elem_head,
        elem_h=elem_h,
        elem_edge=elem_edge,
    )
