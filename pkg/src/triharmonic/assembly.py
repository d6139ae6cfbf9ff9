"""Mass, stiffness and load assembly, and the discrete Laplacian.

Matrices are assembled on the full spaces cell by cell and then sliced to
the active DOFs of the test (rows) and trial (columns) spaces, so pairs of
different degrees and zero-trace variants share one code path.
"""

from __future__ import annotations

import weakref
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .lagrange import FeSpace, build_space, eval_reference_basis, interpolate
from .quadrature import QuadratureRule, rule


def _check_same_mesh(a: FeSpace, b: FeSpace) -> None:
    if a.mesh is not b.mesh:
        raise ValueError("trial and test spaces live on different meshes")


def _assemble(test: FeSpace, trial: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    rows = np.repeat(test.cell_dofs[:, :, None], trial.cell_dofs.shape[1], axis=2)
    cols = np.repeat(trial.cell_dofs[:, None, :], test.cell_dofs.shape[1], axis=1)
    A = sp.coo_matrix(
        (local.ravel(), (rows.ravel(), cols.ravel())), shape=(test.n_full, trial.n_full)
    ).tocsr()
    A = A[test.dofs][:, trial.dofs]
    if test is trial:
        A = 0.5 * (A + A.T)
    A = A.tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def _physical_gradients(space: FeSpace, q: QuadratureRule) -> np.ndarray:
    _, dphi = eval_reference_basis(space.degree, q.points)
    return np.einsum("pbi,tij->tpbj", dphi, space.mesh.inv_jacobians)


def stiffness(trial: FeSpace, test: FeSpace) -> sp.csr_matrix:
    """``A[i, j] = integral of grad(trial_j) . grad(test_i)``."""
    _check_same_mesh(trial, test)
    q = rule(max(1, trial.degree + test.degree - 2))
    g_trial = _physical_gradients(trial, q)
    g_test = g_trial if test is trial else _physical_gradients(test, q)
    local = np.einsum("p,t,tpaj,tpbj->tab", q.weights, trial.mesh.dets, g_test, g_trial)
    return _assemble(test, trial, local)


def mass(trial: FeSpace, test: FeSpace) -> sp.csr_matrix:
    """``M[i, j] = integral of trial_j * test_i``; degrees may differ."""
    _check_same_mesh(trial, test)
    q = rule(trial.degree + test.degree)
    v_trial, _ = eval_reference_basis(trial.degree, q.points)
    v_test, _ = eval_reference_basis(test.degree, q.points)
    ref = np.einsum("p,pa,pb->ab", q.weights, v_test, v_trial)
    local = trial.mesh.dets[:, None, None] * ref[None]
    return _assemble(test, trial, local)


def load_vector(test: FeSpace, f: Callable, q: QuadratureRule) -> np.ndarray:
    """``b[i] = integral of f * test_i`` with ``f(x, y)`` vectorized."""
    m = test.mesh
    pts = m.map_to_physical(q.points)
    fv = np.broadcast_to(np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float), pts.shape[:2])
    phi, _ = eval_reference_basis(test.degree, q.points)
    local = np.einsum("p,t,tp,pb->tb", q.weights, m.dets, fv, phi)
    full = np.bincount(test.cell_dofs.ravel(), weights=local.ravel(), minlength=test.n_full)
    return full[test.dofs]


def interpolated_load_vector(test: FeSpace, f: Callable) -> np.ndarray:
    """``b = M I_h f``: the nodal interpolant of ``f`` on the full space, tested exactly.

    Boundary values of ``f`` are kept. Consistent to ``O(h^{k+1})``.
    """
    full = test if not test.homogeneous else build_space(test.mesh, test.degree, homogeneous=False)
    return mass(full, test) @ interpolate(full, f)


def gradient_load_vector(test: FeSpace, grad: Callable, q: QuadratureRule) -> np.ndarray:
    """``b[i] = integral of grad(w) . grad(test_i)`` for ``grad(x, y) -> (wx, wy)``."""
    m = test.mesh
    pts = m.map_to_physical(q.points)
    gx, gy = grad(pts[..., 0], pts[..., 1])
    gw = np.stack(np.broadcast_arrays(gx, gy), axis=-1)
    g_test = _physical_gradients(test, q)
    local = np.einsum("p,t,tpj,tpbj->tb", q.weights, m.dets, gw, g_test)
    full = np.bincount(test.cell_dofs.ravel(), weights=local.ravel(), minlength=test.n_full)
    return full[test.dofs]


class DiscreteLaplacian:
    """``z = Delta_h w`` on a zero-trace space: solves ``M z = -K w``.

    The mass factorization is computed once and reused.
    """

    def __init__(self, space: FeSpace):
        if not space.homogeneous:
            raise ValueError("the discrete Laplacian is defined on a zero-trace space")
        # No reference to ``space`` is kept: instances live in a weak-keyed cache.
        self.M = mass(space, space)
        self.K = stiffness(space, space)
        self._lu = splu(self.M.tocsc(), permc_spec="MMD_AT_PLUS_A")

    def apply(self, u_coeffs) -> np.ndarray:
        return self.from_rhs(-(self.K @ np.asarray(u_coeffs, dtype=float)))

    def from_rhs(self, rhs) -> np.ndarray:
        """Solve ``M z = rhs``, e.g. with ``rhs = -(grad w, grad v_i)`` for a non-discrete ``w``."""
        rhs = np.asarray(rhs, dtype=float)
        z = self._lu.solve(rhs)
        r = rhs - self.M @ z
        z += self._lu.solve(r)
        return z


_LAPLACIANS: "weakref.WeakKeyDictionary[FeSpace, DiscreteLaplacian]" = weakref.WeakKeyDictionary()


def discrete_laplacian(space: FeSpace) -> DiscreteLaplacian:
    op = _LAPLACIANS.get(space)
    if op is None:
        op = _LAPLACIANS[space] = DiscreteLaplacian(space)
    return op


def apply_discrete_laplacian(u_coeffs, space: FeSpace) -> np.ndarray:
    return discrete_laplacian(space).apply(u_coeffs)


def write_coo(A, path: str | Path) -> None:
    """Write ``row col value`` lines (0-based) sorted by (row, col)."""
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        for r, c, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
