"""Continuous Lagrange spaces of degree 1 and 2 on structured meshes.

On the structured unit-square mesh the degree-``k`` nodes are exactly the
points of the lattice ``(I/(k n), J/(k n))``, so the global DOF of a node is
``J * (k n + 1) + I``: lexicographic in ``(y, x)``. Zero-trace spaces keep
only the interior lattice points, numbered in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh

SUPPORTED_DEGREES = (1, 2)

# Reference nodes: vertices first, then midpoints of edges (0,1), (1,2), (2,0).
_REF_NODES = {
    1: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    2: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]),
}


def _check_degree(k: int) -> None:
    if k not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported polynomial degree {k}; expected one of {SUPPORTED_DEGREES}")


def reference_nodes(k: int) -> np.ndarray:
    _check_degree(k)
    return _REF_NODES[k]


def eval_reference_basis(k: int, p) -> tuple[np.ndarray, np.ndarray]:
    """Shape functions and their reference gradients.

    Parameters
    ----------
    k : int
        Polynomial degree (1 or 2).
    p : array_like, shape (2,) or (n_points, 2)
        Reference coordinates. Points outside the reference triangle are
        allowed; the shape functions are then evaluated as polynomials.

    Returns
    -------
    values : ndarray, shape (n_points, n_basis)
    gradients : ndarray, shape (n_points, n_basis, 2)
        Squeezed to drop the point axis when a single point is given.
    """
    _check_degree(k)
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    x, y = pts[:, 0], pts[:, 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    # d(lambda_i)/d(x, y)
    dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    lam = np.stack([l0, l1, l2], axis=1)

    if k == 1:
        values = lam
        grads = np.broadcast_to(dl, (len(x), 3, 2)).copy()
    else:
        values = np.empty((len(x), 6))
        grads = np.empty((len(x), 6, 2))
        for i in range(3):
            values[:, i] = lam[:, i] * (2.0 * lam[:, i] - 1.0)
            grads[:, i] = (4.0 * lam[:, i] - 1.0)[:, None] * dl[i]
        for e, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):
            values[:, 3 + e] = 4.0 * lam[:, i] * lam[:, j]
            grads[:, 3 + e] = 4.0 * (lam[:, j][:, None] * dl[i] + lam[:, i][:, None] * dl[j])
    if single:
        return values[0], grads[0]
    return values, grads


@dataclass(frozen=True, eq=False)
class FeSpace:
    """Lagrange space ``S_h^k`` or its zero-trace subspace ``S_{h,0}^k``.

    ``cell_dofs`` and ``full_nodes`` always refer to the full space; ``dofs``
    lists the full-space indices that carry a coefficient in this space, in
    order, and ``index_of`` maps full-space indices to space indices (-1 for
    constrained boundary nodes).
    """

    mesh: Mesh
    degree: int
    homogeneous: bool
    full_nodes: np.ndarray
    cell_dofs: np.ndarray
    boundary: np.ndarray
    dofs: np.ndarray
    index_of: np.ndarray

    @property
    def n_full(self) -> int:
        return self.full_nodes.shape[0]

    @property
    def n_dofs(self) -> int:
        return self.dofs.shape[0]

    @property
    def nodes(self) -> np.ndarray:
        return self.full_nodes[self.dofs]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def to_full(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.n_dofs,):
            raise ValueError(f"expected {self.n_dofs} coefficients, got shape {coeffs.shape}")
        full = np.zeros(self.n_full)
        full[self.dofs] = coeffs
        return full


def build_space(m: Mesh, k: int, homogeneous: bool) -> FeSpace:
    _check_degree(k)
    N = k * m.n
    side = N + 1
    I, J = np.meshgrid(np.arange(side), np.arange(side))
    I, J = I.ravel(), J.ravel()
    full_nodes = np.column_stack([I / N, J / N])
    boundary = (I == 0) | (I == N) | (J == 0) | (J == N)

    # Lattice position of every local node: vertex lattice coords scaled by k
    # plus the reference offset mapped through the (lattice-scaled) Jacobian.
    ref = _REF_NODES[k]
    phys = m.map_to_physical(ref)
    lattice = np.rint(phys * N).astype(np.int64)
    if np.max(np.abs(lattice - phys * N)) > 1e-8:
        raise RuntimeError("local nodes do not fall on the degree lattice")
    cell_dofs = lattice[..., 1] * side + lattice[..., 0]

    if homogeneous:
        dofs = np.flatnonzero(~boundary)
    else:
        dofs = np.arange(side * side)
    index_of = np.full(side * side, -1, dtype=np.int64)
    index_of[dofs] = np.arange(len(dofs))

    for a in (full_nodes, cell_dofs, boundary, dofs, index_of):
        a.setflags(write=False)
    return FeSpace(
        mesh=m,
        degree=k,
        homogeneous=bool(homogeneous),
        full_nodes=full_nodes,
        cell_dofs=cell_dofs,
        boundary=boundary,
        dofs=dofs,
        index_of=index_of,
    )


def interpolate(s: FeSpace, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Nodal interpolant of ``g(x, y)``; boundary values are dropped for zero-trace spaces."""
    nodes = s.nodes
    vals = np.asarray(g(nodes[:, 0], nodes[:, 1]), dtype=float)
    return np.broadcast_to(vals, (s.n_dofs,)).copy()


def eval_fe_function(s: FeSpace, coeffs, p) -> tuple[np.ndarray, np.ndarray]:
    """Value and gradient of the FE function at physical point(s) ``p``.

    Raises ``ValueError`` for points outside the unit square.
    """
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    full = s.to_full(coeffs)
    tri, ref = s.mesh.locate(pts)
    values = np.empty(len(pts))
    grads = np.empty((len(pts), 2))
    for r, (t, xi) in enumerate(zip(tri, ref)):
        phi, dphi = eval_reference_basis(s.degree, xi)
        c = full[s.cell_dofs[t]]
        values[r] = c @ phi
        grads[r] = (c @ dphi) @ s.mesh.inv_jacobians[t]
    if single:
        return values[0], grads[0]
    return values, grads


def tabulate(s: FeSpace, coeffs, ref_points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values ``(n_tri, n_pts)`` and gradients ``(n_tri, n_pts, 2)`` at mapped reference points."""
    full = s.to_full(coeffs)
    phi, dphi = eval_reference_basis(s.degree, np.atleast_2d(ref_points))
    c = full[s.cell_dofs]
    values = c @ phi.T
    ref_grad = np.einsum("tb,pbi->tpi", c, dphi)
    grads = np.einsum("tpi,tij->tpj", ref_grad, s.mesh.inv_jacobians)
    return values, grads
