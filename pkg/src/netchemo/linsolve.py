"""Per-step system matrices, M-matrix checks, and sparse direct solves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class DimensionMismatch(ValueError):
    pass


class SingularMatrix(ArithmeticError):
    pass


def compose(mass_diag: np.ndarray, tau: float, parts=()) -> sp.csr_matrix:
    """S = (1/tau) * diag(mass) + sum of signed sparse parts.

    `parts` is a sequence of (sign, matrix) pairs.
    """
    if not tau > 0:
        raise ValueError(f"time step {tau} must be positive")
    n = len(mass_diag)
    s = sp.diags(np.asarray(mass_diag, dtype=float) / tau, format="csr")
    for sign, part in parts:
        if part.shape != (n, n):
            raise DimensionMismatch(f"part of shape {part.shape} does not match dimension {n}")
        s = s + sign * part
    return s.tocsr()


@dataclass(frozen=True)
class MMatrixReport:
    is_m_matrix: bool
    min_diagonal: float
    max_offdiagonal: float
    min_column_sum: float


def check_m_matrix(s) -> MMatrixReport:
    """Check positive diagonal, nonpositive off-diagonal, positive column sums.

    Together these give strict column-wise diagonal dominance, which is
    sufficient for the M-matrix property and inverse positivity.
    """
    s = sp.csr_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"matrix of shape {s.shape} is not square")
    diag = s.diagonal()
    off = s - sp.diags(diag)
    max_off = float(off.data.max()) if off.nnz else 0.0
    col_sums = np.asarray(s.sum(axis=0)).ravel()
    ok = bool(diag.min() > 0.0 and max_off <= 0.0 and col_sums.min() > 0.0)
    return MMatrixReport(
        is_m_matrix=ok,
        min_diagonal=float(diag.min()),
        max_offdiagonal=max_off,
        min_column_sum=float(col_sums.min()),
    )


class Factorization:
    """Sparse LU factors of one matrix; reusable for many right-hand sides."""

    def __init__(self, matrix):
        matrix = sp.csc_matrix(matrix)
        scale = np.abs(matrix.data).max() if matrix.nnz else 0.0
        if scale == 0.0:
            raise SingularMatrix("zero matrix")
        try:
            self._lu = spla.splu(matrix)
        except RuntimeError as exc:  # SuperLU signals singularity this way
            raise SingularMatrix(str(exc)) from exc
        # reject factorizations with pivots below the relative tolerance
        u_diag = np.abs(self._lu.U.diagonal())
        if u_diag.min() <= 1e-14 * scale:
            raise SingularMatrix(f"pivot {u_diag.min():.3e} below tolerance")
        self.shape = matrix.shape

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.shape[0],):
            raise DimensionMismatch(f"rhs of shape {b.shape} does not match {self.shape}")
        return self._lu.solve(b)


def factorize(s) -> Factorization:
    return Factorization(s)


def solve(factorization: Factorization, b: np.ndarray) -> np.ndarray:
    return factorization.solve(b)
