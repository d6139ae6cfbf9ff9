"""Discrete Lagrange multiplier spaces.

A multiplier basis function is stored as a row of a sparse combination
matrix ``R`` acting on the full Lagrange basis of ``S_h^k``: row ``i`` holds
the coefficients of multiplier ``i`` in that basis.

Simply supported: the rows select the interior nodal functions.

Clamped: every boundary nodal function is redistributed onto the interior
nodal functions of the closest internal triangle ``T``. The weight it gives
to the function of interior node ``i`` of ``T`` is the value, at the
boundary node, of that local shape function continued polynomially beyond
``T`` (for ``k = 1``: the barycentric coordinates with respect to ``T``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .lagrange import FeSpace, build_space, eval_reference_basis
from .mesh import Mesh, internal_triangles


class BcKind(str, Enum):
    SIMPLY_SUPPORTED = "simply-supported"
    CLAMPED = "clamped"


class NoInternalTriangleError(ValueError):
    """Raised when a clamped multiplier space is requested on a mesh with n <= 2."""


@dataclass(frozen=True, eq=False)
class MultiplierSpace:
    full: FeSpace
    R: sp.csr_matrix
    bc_kind: BcKind
    # Boundary full-space DOF -> internal triangle it was redistributed to (clamped only).
    host_triangle: dict

    @property
    def n_dofs(self) -> int:
        return self.R.shape[0]

    def to_full(self, coeffs) -> np.ndarray:
        """Coefficients in the full Lagrange basis of a multiplier combination."""
        return self.R.T @ np.asarray(coeffs, dtype=float)


def _closest_internal(m: Mesh, candidates: np.ndarray, points: np.ndarray) -> np.ndarray:
    # Euclidean distance to the centroid; ties go to the lowest triangle index.
    cent = m.centroids()[candidates]
    d2 = ((points[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
    d2 = np.round(d2, 12)
    return candidates[np.argmin(d2, axis=1)]


def build(m: Mesh, k: int, bc: BcKind | str) -> MultiplierSpace:
    bc = BcKind(bc)
    full = build_space(m, k, homogeneous=False)
    interior = full.interior
    d0 = len(interior)
    row_of = np.full(full.n_full, -1, dtype=np.int64)
    row_of[interior] = np.arange(d0)

    rows = list(range(d0))
    cols = interior.tolist()
    vals = [1.0] * d0
    host: dict[int, int] = {}

    if bc is BcKind.CLAMPED:
        internal = np.array(sorted(internal_triangles(m)), dtype=np.int64)
        if internal.size == 0:
            raise NoInternalTriangleError(
                f"no internal triangle on the n={m.n} mesh; clamped multipliers need n >= 3"
            )
        bnodes = np.flatnonzero(full.boundary)
        xb = full.full_nodes[bnodes]
        tri = _closest_internal(m, internal, xb)
        ref = np.einsum("tij,tj->ti", m.inv_jacobians[tri], xb - m.origins[tri])
        alpha, _ = eval_reference_basis(k, ref)
        for b, t, a in zip(bnodes, tri, alpha):
            host[int(b)] = int(t)
            local = full.cell_dofs[t]
            rows.extend(row_of[local].tolist())
            cols.extend([int(b)] * len(local))
            vals.extend(a.tolist())
        if np.any(row_of[full.cell_dofs[internal]] < 0):
            raise RuntimeError("internal triangle carries a boundary node")

    R = sp.coo_matrix((vals, (rows, cols)), shape=(d0, full.n_full)).tocsr()
    R.sum_duplicates()
    R.eliminate_zeros()
    R.sort_indices()
    return MultiplierSpace(full=full, R=R, bc_kind=bc, host_triangle=host)


def selection(space: FeSpace) -> sp.csr_matrix:
    """0/1 matrix mapping full-space coefficients to ``space``'s active DOFs."""
    n = space.n_dofs
    return sp.csr_matrix((np.ones(n), (np.arange(n), space.dofs)), shape=(n, space.n_full))


def restrict_matrix(M_full, R_left, R_right) -> sp.csr_matrix:
    """``R_left @ M_full @ R_right.T``."""
    if R_left.shape[1] != M_full.shape[0] or R_right.shape[1] != M_full.shape[1]:
        raise ValueError(
            f"incompatible shapes: R_left {R_left.shape}, M {M_full.shape}, R_right {R_right.shape}"
        )
    out = (sp.csr_matrix(R_left) @ sp.csr_matrix(M_full) @ sp.csr_matrix(R_right).T).tocsr()
    out.sort_indices()
    return out
