"""Matplotlib figures written next to the CSV output of the CLI."""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .stepping import Trace


def _edge_grid(n_edges: int) -> tuple[int, int]:
    cols = min(4, n_edges)
    rows = math.ceil(n_edges / cols)
    return rows, cols


def plot_snapshots(trace: Trace, outdir: str) -> list[str]:
    """One figure per component: nodal profiles per edge at snapshot times."""
    dofmap = trace.dofmap
    mesh = dofmap.mesh
    edges = mesh.graph.edges
    paths = []
    for component, label in (("u", "density u"), ("c", "attractant c")):
        rows, cols = _edge_grid(len(edges))
        fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.4 * rows), squeeze=False)
        cmap = plt.get_cmap("viridis")
        n_snap = len(trace.snapshots)
        for i, edge in enumerate(edges):
            ax = axes[i // cols][i % cols]
            x = mesh.node_coords(i)
            for j, snap in enumerate(trace.snapshots):
                vals = getattr(snap, component)[dofmap.edge_dofs[i]]
                color = cmap(j / max(1, n_snap - 1))
                ax.plot(x, vals, color=color, lw=1.0, label=f"t={snap.t:g}")
            ax.set_title(f"edge {edge.id}", fontsize=9)
            ax.tick_params(labelsize=7)
        for k in range(len(edges), rows * cols):
            axes[k // cols][k % cols].set_axis_off()
        if len(edges) <= 4:
            axes[0][0].legend(fontsize=7)
        fig.suptitle(label)
        fig.tight_layout()
        path = os.path.join(outdir, f"{component}_profiles.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def plot_diagnostics(trace: Trace, outdir: str) -> str:
    """Mass, minimum nodal values, and monitored energies over time."""
    diags = trace.diagnostics
    t = [d.t for d in diags]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    axes[0].plot(t, [d.mass_u for d in diags], label="mass u")
    axes[0].plot(t, [d.mass_c for d in diags], label="mass c")
    axes[0].set_xlabel("t")
    axes[0].set_title("total mass")
    axes[0].legend(fontsize=8)
    axes[1].plot(t, [d.min_u for d in diags], label="min u")
    axes[1].plot(t, [d.min_c for d in diags], label="min c")
    axes[1].set_xlabel("t")
    axes[1].set_title("minimum nodal value")
    axes[1].legend(fontsize=8)
    axes[2].plot(t, [d.l2_u for d in diags], label=r"$\|u\|_{L^2}$")
    axes[2].plot(t, [d.energy_u for d in diags], label=r"$\sum \tau\|\partial_x u\|^2$")
    axes[2].set_xlabel("t")
    axes[2].set_title("monitored energies")
    axes[2].legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, "diagnostics.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_convergence(tables, outdir: str) -> str:
    """Log-log error plot for both components with a first-order reference."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, component in zip(axes, ("u", "c")):
        rows = tables[component]
        h = np.array([r.h for r in rows])
        ax.loglog(h, [r.err_linf_l2 for r in rows], "o-", label=r"$L^\infty(L^2)$")
        ax.loglog(h, [r.err_l2_h1 for r in rows], "s-", label=r"$L^2(H^1)$")
        ref = rows[0].err_linf_l2 * h / h[0]
        ax.loglog(h, ref, "k--", lw=0.8, label="order 1")
        ax.set_xlabel("h")
        ax.set_title(component)
        ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, "convergence.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
