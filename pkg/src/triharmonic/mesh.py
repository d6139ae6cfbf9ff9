"""Structured triangulations of the unit square.

The square is cut into an ``n x n`` grid of cells and every cell is split
along one diagonal. Vertices are numbered row-major (``j * (n + 1) + i``
for the vertex at ``(i/n, j/n)``) and each cell contributes its lower
triangle before its upper one.

Diagonal patterns:

``diagonal``
    every cell cut from lower-left to upper-right.
``quadrant``
    diagonals in each quadrant of the square point at the centre. For
    ``n = 2`` this is the 8-triangle mesh with a centre vertex; it is the
    family obtained from that mesh by red refinement.
``union-jack``
    cut direction alternating in a checkerboard.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BOUNDARY_TOL = 1e-14
PATTERNS = ("diagonal", "quadrant", "union-jack")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of ``(0, 1)^2`` with ``2 n^2`` congruent triangles.

    Attributes
    ----------
    n : int
        Number of grid subdivisions per side.
    vertices : ndarray, shape (n_vertices, 2)
    triangles : ndarray, shape (n_triangles, 3)
        Counterclockwise vertex indices.
    boundary_vertex_flags : ndarray of bool, shape (n_vertices,)
    h : float
        Longest edge length.
    """

    n: int
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_vertex_flags: np.ndarray
    h: float
    # Affine maps x = B @ xi + x0 per triangle.
    jacobians: np.ndarray = field(repr=False)
    dets: np.ndarray = field(repr=False)
    inv_jacobians: np.ndarray = field(repr=False)
    pattern: str = "diagonal"
    # True where the cell is cut from lower-right to upper-left.
    anti: np.ndarray = field(repr=False, default=None)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def areas(self) -> np.ndarray:
        return 0.5 * self.dets

    @property
    def origins(self) -> np.ndarray:
        return self.vertices[self.triangles[:, 0]]

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def map_to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        """Images of reference points in every triangle, shape (n_tri, n_pts, 2)."""
        ref_points = np.atleast_2d(ref_points)
        return self.origins[:, None, :] + np.einsum("tij,pj->tpi", self.jacobians, ref_points)

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Containing triangle and reference coordinates for points in the closed square.

        Raises
        ------
        ValueError
            If any point lies outside ``[0, 1]^2``.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(pts < -BOUNDARY_TOL) or np.any(pts > 1 + BOUNDARY_TOL):
            raise ValueError("point outside the unit square")
        n = self.n
        s = np.clip(pts * n, 0.0, n)
        ij = np.minimum(np.floor(s).astype(np.int64), n - 1)
        local = s - ij
        cell = ij[:, 1] * n + ij[:, 0]
        anti = self.anti[cell]
        upper = np.where(anti, local[:, 0] + local[:, 1] > 1.0, local[:, 1] > local[:, 0])
        tri = 2 * cell + upper
        ref = np.einsum("tij,tj->ti", self.inv_jacobians[tri], pts - self.origins[tri])
        return tri, ref


def _anti_cells(n: int, pattern: str) -> np.ndarray:
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    if pattern == "diagonal":
        anti = np.zeros_like(i, dtype=bool)
    elif pattern == "quadrant":
        # Odd n leaves a middle row/column; it joins the upper/right half.
        anti = (2 * i + 1 < n) != (2 * j + 1 < n)
    elif pattern == "union-jack":
        anti = (i + j) % 2 == 1
    else:
        raise ValueError(f"unknown mesh pattern {pattern!r}; choose from {PATTERNS}")
    return anti.ravel()


def _build(n: int, pattern: str = "diagonal") -> Mesh:
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)  # row-major in y
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    a = j * (n + 1) + i
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    anti = _anti_cells(n, pattern)
    lower = np.where(anti[:, None], np.column_stack([a, b, d]), np.column_stack([a, b, c]))
    upper = np.where(anti[:, None], np.column_stack([b, c, d]), np.column_stack([a, c, d]))
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    on_edge = lambda t: (np.abs(t) <= BOUNDARY_TOL) | (np.abs(t - 1.0) <= BOUNDARY_TOL)  # noqa: E731
    flags = on_edge(vertices[:, 0]) | on_edge(vertices[:, 1])

    p = vertices[triangles]
    B = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
    dets = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    inv = np.empty_like(B)
    inv[:, 0, 0] = B[:, 1, 1] / dets
    inv[:, 1, 1] = B[:, 0, 0] / dets
    inv[:, 0, 1] = -B[:, 0, 1] / dets
    inv[:, 1, 0] = -B[:, 1, 0] / dets

    edges = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    h = float(np.max(np.hypot(edges[:, 0], edges[:, 1])))

    return Mesh(
        n=n,
        vertices=_frozen(vertices),
        triangles=_frozen(triangles),
        boundary_vertex_flags=_frozen(flags),
        h=h,
        jacobians=_frozen(B),
        dets=_frozen(dets),
        inv_jacobians=_frozen(inv),
        pattern=pattern,
        anti=_frozen(anti),
    )


def build_unit_square(n: int, pattern: str = "diagonal") -> Mesh:
    """Structured mesh with ``n`` cells per side."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return _build(int(n), pattern)


def refine(m: Mesh) -> Mesh:
    # Red refinement of the diagonal and quadrant families coincides with
    # the 2n grid of the same pattern (quadrant needs even n).
    if m.pattern == "quadrant" and m.n % 2:
        raise ValueError("quadrant meshes refine nestedly only for even n")
    return _build(2 * m.n, m.pattern)


def internal_triangles(m: Mesh) -> set[int]:
    """Indices of triangles none of whose vertices lie on the boundary."""
    touching = m.boundary_vertex_flags[m.triangles].any(axis=1)
    return set(np.flatnonzero(~touching).tolist())


def write_mesh(m: Mesh, path: str | Path) -> None:
    """Plain-text dump: one ``x y`` line per vertex, then one ``i j k`` line per triangle."""
    with open(path, "w") as fh:
        for x, y in m.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for t in m.triangles:
            fh.write(f"{t[0]} {t[1]} {t[2]}\n")
