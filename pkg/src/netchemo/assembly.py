"""Operator assembly on network meshes.

All operators act on nodal coefficient vectors of continuous piecewise
linear functions.  The mass matrix is lumped (trapezoidal rule per
element) and therefore diagonal; it is represented by its diagonal as a
plain ndarray.  Stiffness and upwind convection matrices are assembled
in CSR format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import DofMap


@dataclass(frozen=True)
class FEFunction:
    """Nodal coefficients of a continuous piecewise-linear network function."""

    dofmap: DofMap
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.dofmap.n_dofs,):
            raise ValueError(
                f"coefficient vector of length {len(self.values)} does not match "
                f"{self.dofmap.n_dofs} degrees of freedom"
            )

    def edge_values(self, edge_index: int) -> np.ndarray:
        """Nodal values along one edge, tail to head."""
        return self.values[self.dofmap.edge_dofs[edge_index]]


def _per_edge(dofmap: DofMap, eta) -> np.ndarray:
    """Expand a scalar or per-edge sequence to an array aligned with edges."""
    n_edges = len(dofmap.mesh.graph.edges)
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 0:
        return np.full(n_edges, float(eta))
    if eta.shape != (n_edges,):
        raise ValueError(f"expected {n_edges} per-edge coefficients, got shape {eta.shape}")
    return eta


def lumped_mass(dofmap: DofMap, eta) -> np.ndarray:
    """Diagonal of the lumped mass matrix M(eta).

    Entry i collects eta_e * h_e / 2 from every element incident to
    node i, across all edges meeting at shared vertices.
    """
    eta = _per_edge(dofmap, eta)
    w = eta[dofmap.elem_edge] * dofmap.elem_h / 2.0
    diag = np.zeros(dofmap.n_dofs)
    np.add.at(diag, dofmap.elem_tail, w)
    np.add.at(diag, dofmap.elem_head, w)
    return diag


def stiffness(dofmap: DofMap, eta) -> sp.csr_matrix:
    """Stiffness matrix K(eta) from element matrices (eta_e/h_e)*[[1,-1],[-1,1]]."""
    eta = _per_edge(dofmap, eta)
    k = eta[dofmap.elem_edge] / dofmap.elem_h
    t, hd = dofmap.elem_tail, dofmap.elem_head
    rows = np.concatenate([t, t, hd, hd])
    cols = np.concatenate([t, hd, t, hd])
    data = np.concatenate([k, -k, -k, k])
    mat = sp.coo_matrix((data, (rows, cols)), shape=(dofmap.n_dofs, dofmap.n_dofs))
    return mat.tocsr()


def upwind_convection(dofmap: DofMap, chi, c_prev: FEFunction | np.ndarray) -> sp.csr_matrix:
    """Upwind convection matrix driven by the frozen chemoattractant field.

    Per element [x_k, x_l] with a = chi_e * (c(x_l) - c(x_k)) / h_e, the
    convected density is taken from the node the flow leaves: the tail
    node for a >= 0, the head node otherwise.  This yields the element
    matrices [[-a, 0], [a, 0]] and [[0, -a], [0, a]], whose columns sum
    to zero (mass conservation) with nonpositive diagonal.
    """
    chi = _per_edge(dofmap, chi)
    c = c_prev.values if isinstance(c_prev, FEFunction) else np.asarray(c_prev, dtype=float)
    if c.shape != (dofmap.n_dofs,):
        raise ValueError("c_prev does not match the DOF map")

    t, hd = dofmap.elem_tail, dofmap.elem_head
    a = chi[dofmap.elem_edge] * (c[hd] - c[t]) / dofmap.elem_h
    upwind = np.where(a >= 0.0, t, hd)
    rows = np.concatenate([t, hd])
    cols = np.concatenate([upwind, upwind])
    data = np.concatenate([-a, a])
    mat = sp.coo_matrix((data, (rows, cols)), shape=(dofmap.n_dofs, dofmap.n_dofs))
    return mat.tocsr()


# Composite Simpson on 4 panels per element; positive weights keep the
# patch averages of nonnegative data nonnegative.
_SIMPSON_POINTS = np.linspace(0.0, 1.0, 5)
_SIMPSON_WEIGHTS = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 12.0


def quasi_interpolate(dofmap: DofMap, fns) -> FEFunction:
    """Patch-averaging quasi-interpolant of per-edge data.

    `fns` is one callable per edge mapping the edge-local coordinate in
    [0, length] to a value.  The nodal value at x_i is the mean of the
    data over all elements containing x_i, with patches spanning every
    incident edge at shared vertices.
    """
    mesh = dofmap.mesh
    n_edges = len(mesh.graph.edges)
    if len(fns) != n_edges:
        raise ValueError(f"expected {n_edges} per-edge functions, got {len(fns)}")

    integral = np.zeros(dofmap.n_dofs)
    measure = np.zeros(dofmap.n_dofs)
    for i in range(n_edges):
        f = fns[i]
        h = mesh.element_size(i)
        coords = mesh.node_coords(i)
        dofs = dofmap.edge_dofs[i]
        # quadrature points per element: (n_elem, 5)
        pts = coords[:-1, None] + h * _SIMPSON_POINTS[None, :]
        vals = np.vectorize(f, otypes=[float])(pts)
        elem_int = h * vals @ _SIMPSON_WEIGHTS
        np.add.at(integral, dofs[:-1], elem_int)
        np.add.at(integral, dofs[1:], elem_int)
        np.add.at(measure, dofs[:-1], h)
        np.add.at(measure, dofs[1:], h)
    return FEFunction(dofmap, integral / measure)


@dataclass(frozen=True)
class Norms:
    lumped_norm: float
    l2_norm: float
    h1_norm: float
    h1_seminorm: float
    linf_nodal: float
    total_mass: float


def norms(v: FEFunction) -> Norms:
    """Norms and functionals of a P1 network function (exact integration)."""
    dofmap = v.dofmap
    vals = v.values
    a = vals[dofmap.elem_tail]
    b = vals[dofmap.elem_head]
    h = dofmap.elem_h

    m1 = lumped_mass(dofmap, 1.0)
    lumped = float(np.sqrt(vals @ (m1 * vals)))
    # exact: integral of (linear)^2 over an element is h*(a^2+ab+b^2)/3
    l2sq = float(np.sum(h * (a * a + a * b + b * b) / 3.0))
    semisq = float(np.sum((b - a) ** 2 / h))
    return Norms(
        lumped_norm=lumped,
        l2_norm=np.sqrt(l2sq),
        h1_norm=np.sqrt(l2sq + semisq),
        h1_seminorm=np.sqrt(semisq),
        linf_nodal=float(np.max(np.abs(vals))) if len(vals) else 0.0,
        total_mass=float(m1 @ vals),
    )


def total_mass(v: FEFunction) -> float:
    """Exact integral of the P1 function over the network."""
    return float(lumped_mass(v.dofmap, 1.0) @ v.values)
