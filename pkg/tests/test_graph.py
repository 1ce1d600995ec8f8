import numpy as np
import pytest

from netchemo.graph import (
    DanglingEndpoint,
    DisconnectedGraph,
    GraphError,
    NonpositiveLength,
    build_graph,
    dof_map,
    refine,
    uniform_mesh,
)


def tripod():
    return build_graph(
        ["v1", "v2", "v3", "v4"],
        [("e1", "v1", "v4", 1.0), ("e2", "v4", "v2", 1.0), ("e3", "v4", "v3", 1.0)],
    )


def test_tripod_vertex_classification():
    g = tripod()
    assert g.interior_vertices == ("v4",)
    assert g.boundary_vertices == ("v1", "v2", "v3")
    assert g.total_length == 3.0


def test_single_edge_classification():
    g = build_graph(["v1", "v2"], [("e1", "v1", "v2", 1.0)])
    assert g.boundary_vertices == ("v1", "v2")
    assert g.interior_vertices == ()


def test_incidence_signs():
    g = tripod()
    e1 = g.edges[0]
    assert g.incidence_sign(e1, "v1") == -1
    assert g.incidence_sign(e1, "v4") == +1
    with pytest.raises(KeyError):
        g.incidence_sign(e1, "v2")


def test_invalid_graphs():
    with pytest.raises(NonpositiveLength):
        build_graph(["v1", "v2"], [("e1", "v1", "v2", 0.0)])
    with pytest.raises(DanglingEndpoint):
        build_graph(["v1"], [("e1", "v1", "v9", 1.0)])
    with pytest.raises(DisconnectedGraph):
        build_graph(
            ["v1", "v2", "v3", "v4"],
            [("e1", "v1", "v2", 1.0), ("e2", "v3", "v4", 1.0)],
        )
    with pytest.raises(GraphError):
        build_graph(["v1", "v1"], [])


def test_uniform_mesh_counts():
    g = tripod()
    m = uniform_mesh(g, 0.5)
    assert m.counts == (2, 2, 2)
    assert m.h == 0.5

    single = build_graph(["v1", "v2"], [("e1", "v1", "v2", 1.0)])
    m2 = uniform_mesh(single, 0.3)
    assert m2.counts == (4,)
    assert m2.h == 0.25

    m3 = uniform_mesh(g, 2.0**-4)
    assert m3.counts == (16, 16, 16)


def test_refine_doubles_and_nests():
    g = tripod()
    m = uniform_mesh(g, 0.5)
    f = refine(m)
    assert f.counts == (4, 4, 4)
    ff = refine(f)
    assert ff.counts == (8, 8, 8)
    # coarse node coordinates appear exactly among the fine ones
    for i in range(3):
        coarse = set(m.node_coords(i).tolist())
        fine = set(f.node_coords(i).tolist())
        assert coarse <= fine


def test_node_coords_orientation():
    g = tripod()
    m = uniform_mesh(g, 0.5)
    x = m.node_coords(0)
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


def test_dof_counts():
    g = tripod()
    assert dof_map(uniform_mesh(g, 0.5)).n_dofs == 7      # 4 + 3*1
    assert dof_map(uniform_mesh(g, 1.0)).n_dofs == 4      # vertex DOFs only
    m16 = uniform_mesh(g, 2.0**-4)
    assert dof_map(m16).n_dofs == 49
    assert dof_map(refine(m16)).n_dofs == 97

    single = build_graph(["v1", "v2"], [("e1", "v1", "v2", 1.0)])
    assert dof_map(uniform_mesh(single, 0.25)).n_dofs == 5


def test_shared_vertex_dofs():
    g = tripod()
    dm = dof_map(uniform_mesh(g, 0.5))
    v4 = dm.vertex_dof["v4"]
    # v4 is the head of e1 and the tail of e2, e3: one shared index
    assert dm.edge_dofs[0][-1] == v4
    assert dm.edge_dofs[1][0] == v4
    assert dm.edge_dofs[2][0] == v4
    # the bijection covers [0, n_dofs) exactly once
    all_dofs = np.concatenate([d[1:-1] for d in dm.edge_dofs])
    all_dofs = np.concatenate([all_dofs, list(dm.vertex_dof.values())])
    assert sorted(all_dofs.tolist()) == list(range(dm.n_dofs))


def test_dof_count_formula_random(rng=np.random.default_rng(7)):
    from oracles import random_small_mesh

    for _ in range(50):
        dm = random_small_mesh(rng)
        mesh = dm.mesh
        expected = len(mesh.graph.vertices) + sum(n - 1 for n in mesh.counts)
        assert dm.n_dofs == expected
