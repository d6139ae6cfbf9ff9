"""Direct solves of sparse symmetric indefinite systems.

The saddle-point matrices are factorized with SuperLU. Without further
information the columns are ordered by COLAMD and rows are pivoted with
threshold partial pivoting. When the caller supplies a symmetric ordering
(see :func:`nested_dissection`) the factorization keeps the diagonal pivots
of that ordering, which preserves its fill pattern; a few steps of iterative
refinement then bring the relative residual under tolerance.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    """Factorization breakdown or residual above tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolveReport:
    x: np.ndarray
    residual: float
    stats: dict = field(default_factory=dict)


def nested_dissection(positions: np.ndarray, priority: np.ndarray, size: int, stride: int = 1) -> np.ndarray:
    """Geometric nested-dissection ordering for unknowns living on a square lattice.

    Parameters
    ----------
    positions : ndarray of int, shape (n_unknowns, 2)
        Lattice coordinates in ``[0, size]`` of each unknown.
    priority : ndarray of int, shape (n_unknowns,)
        Order of the unknowns sharing a lattice point.
    size : int
        Lattice extent.
    stride : int
        Separators are placed on lattice lines that are multiples of
        ``stride`` (the mesh lines), so no element straddles a separator.

    Returns
    -------
    perm : ndarray of int
        ``perm[i]`` is the unknown eliminated ``i``-th.
    """
    side = size + 1
    order: list[np.ndarray] = []

    def block(x0, x1, y0, y1):
        J, I = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
        return (J * side + I).ravel()

    def rec(x0, x1, y0, y1):
        if x0 > x1 or y0 > y1:
            return
        wx, wy = x1 - x0, y1 - y0
        if max(wx, wy) <= 2 * stride:
            order.append(block(x0, x1, y0, y1))
            return
        if wx >= wy:
            mid = min(max(stride * round((x0 + x1) / (2 * stride)), x0 + 1), x1 - 1)
            rec(x0, mid - 1, y0, y1)
            rec(mid + 1, x1, y0, y1)
            order.append(block(mid, mid, y0, y1))
        else:
            mid = min(max(stride * round((y0 + y1) / (2 * stride)), y0 + 1), y1 - 1)
            rec(x0, x1, y0, mid - 1)
            rec(x0, x1, mid + 1, y1)
            order.append(block(x0, x1, mid, mid))

    rec(0, size, 0, size)
    rank = np.empty(side * side, dtype=np.int64)
    rank[np.concatenate(order)] = np.arange(side * side)
    positions = np.asarray(positions, dtype=np.int64)
    key = rank[positions[:, 1] * side + positions[:, 0]]
    return np.lexsort((np.asarray(priority), key))


def _factor(A, ordering):
    if ordering is None:
        return splu(A, permc_spec="COLAMD", diag_pivot_thresh=1.0)
    Ap = A[ordering][:, ordering].tocsc()
    return splu(Ap, permc_spec="NATURAL", diag_pivot_thresh=0.0, options={"SymmetricMode": True})


def _make_solver(lu, ordering):
    if ordering is None:
        return lu.solve

    def apply(r):
        x = np.empty_like(r)
        x[ordering] = lu.solve(r[ordering])
        return x

    return apply


def solve(A, b, tol: float = DEFAULT_TOL, ordering=None, max_refine: int = 5) -> SolveReport:
    """Solve ``A x = b`` and check ``||A x - b|| / ||b|| <= tol``.

    Parameters
    ----------
    A : sparse matrix, square
    b : ndarray
    tol : float
        Relative residual required on return.
    ordering : ndarray of int, optional
        Symmetric elimination order. If the factorization with diagonal
        pivots breaks down, the solve falls back to COLAMD with partial
        pivoting.

    Raises
    ------
    SolverError
        If the matrix is singular or the residual cannot be brought below
        ``tol``; ``residual`` carries the achieved value.
    """
    A = sp.csc_matrix(A)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    n = A.shape[0]
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveReport(np.zeros_like(b), 0.0, {"n": n, "nnz": A.nnz, "refinements": 0})

    t0 = time.perf_counter()
    strategy = "ordered" if ordering is not None else "colamd"
    try:
        lu = _factor(A, ordering)
    except RuntimeError as exc:
        if ordering is None:
            raise SolverError(f"factorization failed: {exc}") from exc
        log.info("ordered factorization failed (%s); falling back to COLAMD", exc)
        return solve(A, b, tol=tol, ordering=None, max_refine=max_refine)
    t1 = time.perf_counter()
    apply = _make_solver(lu, ordering)

    x = apply(b)
    r = b - A @ x
    res = np.linalg.norm(r) / bnorm
    steps = 0
    while not res <= tol and steps < max_refine:
        x = x + apply(r)
        r = b - A @ x
        new = np.linalg.norm(r) / bnorm
        steps += 1
        stalled = not new < 0.5 * res
        res = new
        if stalled:
            break
    if not np.isfinite(res) or res > tol:
        if ordering is not None:
            log.info("ordered solve stalled at %.3e; falling back to COLAMD", res)
            return solve(A, b, tol=tol, ordering=None, max_refine=max_refine)
        raise SolverError(f"relative residual {res:.3e} exceeds tolerance {tol:.1e}", residual=float(res))

    stats = {
        "n": n,
        "nnz": A.nnz,
        "fill": lu.L.nnz + lu.U.nnz,
        "factor_seconds": t1 - t0,
        "refinements": steps,
        "strategy": strategy,
    }
    log.debug("solve: %s residual=%.3e", stats, res)
    return SolveReport(x=x, residual=float(res), stats=stats)
