"""End-to-end acceptance checks for the solver and its study harness.

Each test prints one PASS/FAIL line for its criterion before asserting,
so the verdicts survive in the captured output of failing runs.
"""

import dataclasses
import math

import numpy as np

import netchemo
from netchemo.assembly import FEFunction, lumped_mass, norms, stiffness, upwind_convection
from netchemo.graph import build_graph, dof_map, uniform_mesh
from netchemo.linsolve import check_m_matrix, compose
from netchemo.scenario import parse_scenario, parse_scenario_text
from netchemo.stepping import simulate
from netchemo.study import convergence_study, invariant_report
from oracles import dense_lumped_mass, dense_stiffness, dense_upwind, random_small_mesh


def verdict(label, ok, detail=""):
    print(f"criterion {label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return ok


def single_edge_dofmap(n):
    g = build_graph(["v1", "v2"], [("e1", "v1", "v2", 1.0)])
    return dof_map(uniform_mesh(g, 1.0 / n))


def test_criterion_1_element_matrix_hand_cases():
    dm2 = single_edge_dofmap(2)
    mass_diag = lumped_mass(dm2, 1.0)[dm2.edge_dofs[0]]  # tail-to-head order
    mass_ok = np.allclose(mass_diag, [0.25, 0.5, 0.25], atol=1e-12)

    order = [0, 2, 1]  # v1, interior, v2
    k = stiffness(dm2, 1.0).toarray()[np.ix_(order, order)]
    stiff_ok = np.allclose(k, [[2, -2, 0], [-2, 4, -2], [0, -2, 2]], atol=1e-12)

    dm1 = single_edge_dofmap(1)
    c = np.array([0.0, 1.0])
    up = upwind_convection(dm1, 1.0, c).toarray()
    upwind_ok = np.allclose(up, [[-1.0, 0.0], [1.0, 0.0]], atol=1e-12)

    ok = mass_ok and stiff_ok and upwind_ok
    assert verdict(
        1, ok, f"(mass {mass_ok}, stiffness {stiff_ok}, upwind {upwind_ok})"
    )


def test_criterion_2_dense_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        dm = random_small_mesh(rng, max_elements=4)
        n_edges = len(dm.mesh.graph.edges)
        eta = rng.uniform(0.05, 10.0, n_edges)
        chi = rng.uniform(-5.0, 5.0, n_edges)
        cfield = rng.uniform(0.0, 3.0, dm.n_dofs)
        dm_err = np.max(np.abs(lumped_mass(dm, eta) - dense_lumped_mass(dm, eta)))
        k_err = np.max(np.abs(stiffness(dm, eta).toarray() - dense_stiffness(dm, eta)))
        c_err = np.max(
            np.abs(upwind_convection(dm, chi, cfield).toarray() - dense_upwind(dm, chi, cfield))
        )
        worst = max(worst, dm_err, k_err, c_err)
    ok = worst <= 1e-12
    assert verdict(2, ok, f"(max entrywise deviation {worst:.2e})")


def test_criterion_3_structural_properties():
    rng = np.random.default_rng(777)
    ok = True
    detail = ""
    for trial in range(1000):
        dm = random_small_mesh(rng, max_elements=3)
        n_edges = len(dm.mesh.graph.edges)
        alpha = rng.uniform(0.05, 5.0, n_edges)
        beta = rng.uniform(0.05, 5.0, n_edges)
        gamma = rng.uniform(0.0, 3.0, n_edges)
        chi = rng.uniform(-3.0, 3.0, n_edges)
        cfield = rng.uniform(0.0, 2.0, dm.n_dofs)
        tau = float(rng.uniform(1e-4, 10.0))

        k = stiffness(dm, alpha)
        conv = upwind_convection(dm, chi, cfield)
        for mat, name in ((k, "K"), (conv, "C")):
            dense = mat.toarray()
            if not np.allclose(dense.sum(axis=0), 0.0, atol=1e-10):
                ok, detail = False, f"(trial {trial}: {name} column sums nonzero)"
            diag = np.diag(dense)
            off = dense - np.diag(diag)
            if name == "K" and (np.any(diag < -1e-14) or np.any(off > 1e-14)):
                ok, detail = False, f"(trial {trial}: K sign pattern)"
            if name == "C" and (np.any(diag > 1e-14) or np.any(off < -1e-14)):
                ok, detail = False, f"(trial {trial}: C sign pattern)"

        v = FEFunction(dm, rng.normal(size=dm.n_dofs))
        n = norms(v)
        if not (n.lumped_norm / math.sqrt(3.0) <= n.l2_norm + 1e-12 <= n.lumped_norm + 2e-12):
            ok, detail = False, f"(trial {trial}: norm equivalence)"

        m1 = lumped_mass(dm, 1.0)
        import scipy.sparse as sp

        s_u = compose(m1, tau, [(+1, k), (-1, conv)])
        s_c = compose(
            m1, tau, [(+1, stiffness(dm, beta)), (+1, sp.diags(lumped_mass(dm, gamma)).tocsr())]
        )
        if not check_m_matrix(s_u).is_m_matrix or not check_m_matrix(s_c).is_m_matrix:
            ok, detail = False, f"(trial {trial}: M-matrix check, tau={tau})"
        if not ok:
            break
    assert verdict(3, ok, detail or "(1000 randomized trials)")


def test_criterion_4_conservation_and_positivity():
    scn = parse_scenario(netchemo.bundled_scenario("tripod"))
    assert scn.h == 2.0**-4 and scn.tau == 2.0**-7 and scn.t_end == 1.0
    trace = simulate(scn)
    masses = [d.mass_u for d in trace.diagnostics]
    drift = max(abs(m - 12.0) / 12.0 for m in masses)
    min_u = min(d.min_u for d in trace.diagnostics)
    min_c = min(d.min_c for d in trace.diagnostics)
    ok = drift <= 1e-10 and min_u >= -1e-13 and min_c >= -1e-13
    assert verdict(
        4, ok, f"(mass drift {drift:.2e}, min u {min_u:.2e}, min c {min_c:.2e})"
    )


def test_criterion_5_uniform_state_exactness():
    scn = parse_scenario_text(
        """
[graph]
vertex v1
vertex v2
vertex v3
vertex v4
edge e1 v1 v4 length=1
edge e2 v4 v2 length=1
edge e3 v4 v3 length=1
[params]
* alpha=1 beta=1 gamma=1 delta=1 chi=1
[initial]
* u="4" c="0"
[discretization]
h=0.25 tau=0.5 t_end=1
"""
    )
    trace = simulate(scn)
    u2, c2 = trace.snapshots[-1].u, trace.snapshots[-1].c
    u_dev = np.max(np.abs(u2 - 4.0))
    c_dev = np.max(np.abs(c2 - 20.0 / 9.0))
    ok = u_dev <= 1e-10 and c_dev <= 1e-10
    assert verdict(5, ok, f"(|u-4| {u_dev:.2e}, |c-20/9| {c_dev:.2e})")


def _tripod_study(base_h, base_tau, levels):
    scn = parse_scenario(netchemo.bundled_scenario("tripod"))
    scn = dataclasses.replace(scn, h=base_h, tau=base_tau)
    return convergence_study(scn, levels)


def test_criterion_6_convergence_rates_desk_scale():
    # levels (2^-4, 2^-7) through (2^-8, 2^-11): four refinement pairs
    tables = _tripod_study(2.0**-4, 2.0**-7, levels=4)
    checks = []
    for component in ("u", "c"):
        rows = tables[component]
        for row in rows[-2:]:  # the two finest pairs
            for norm_name, eoc in (("Linf(L2)", row.eoc_linf), ("L2(H1)", row.eoc_h1)):
                inside = eoc is not None and 0.85 <= eoc <= 1.15
                checks.append((component, norm_name, row.h, eoc, inside))
    ok = all(c[-1] for c in checks)
    detail = "; ".join(
        f"{comp} {name} h={h:g}: eoc={eoc:.3f} {'ok' if ins else 'OUT'}"
        for comp, name, h, eoc, ins in checks
    )
    assert verdict(6, ok, f"({detail})")


def test_criterion_7_table_value_reproduction():
    # paper-scale pairs (2^-7, 2^-10)/(2^-8, 2^-11); eoc is the binding check
    tables = _tripod_study(2.0**-7, 2.0**-10, levels=2)
    rows = tables["u"]
    err = rows[0].err_linf_l2
    eoc = rows[1].eoc_linf
    err_ok = abs(err - 0.096656) <= 0.2 * 0.096656
    eoc_ok = eoc is not None and abs(eoc - 0.97) <= 0.1
    ok = err_ok and eoc_ok
    assert verdict(
        7, ok, f"(err {err:.6f} vs 0.096656 [{err_ok}], eoc {eoc:.3f} vs 0.97 [{eoc_ok}])"
    )


def test_criterion_8_block_network():
    scn = parse_scenario(netchemo.bundled_scenario("block"))
    assert scn.h == 2.0**-5 and scn.tau == 2.0**-7 and scn.t_end == 30.0
    trace = simulate(scn)
    report = invariant_report(trace)
    masses = [d.mass_u for d in trace.diagnostics]
    increasing = all(b > a for a, b in zip(masses, masses[1:]))
    balance = report.influx_mode and report.max_mass_violation <= 1e-10
    positive = report.min_u >= -1e-13 and report.min_c >= -1e-13
    ok = increasing and balance and positive
    assert verdict(
        8,
        ok,
        f"(influx balance defect {report.max_mass_violation:.2e}, "
        f"mass {masses[0]:.3f}->{masses[-1]:.3f} increasing={increasing}, "
        f"min u {report.min_u:.2e}, min c {report.min_c:.2e})",
    )
