"""Block saddle-point systems for the mixed sixth-order problem.

Unknowns are ``u``, ``phi = Delta u`` and the multiplier ``lambda``
(``= Delta phi``). With ``b((v, psi), mu) = (psi, mu) + (grad v, grad mu)``
and ``a((u, phi), (v, psi)) = (grad phi, grad psi)`` the discrete problem is

    a_h((u, phi), (v, psi)) + b((v, psi), lambda) = (f, v)
    b((u, phi), mu)                               = 0

Simply supported boundary conditions use ``a_h = a`` on
``S_{h,0}^k x S_{h,0}^k``. Clamped conditions use
``S_{h,0}^{k+1} x S_{h,0}^k`` and add ``(phi - Delta_h u, psi - Delta_h v)``.
``Delta_h u`` is carried as an extra unknown ``z`` tied to ``u`` by
``M z + K u = 0`` through a second multiplier ``p``, which keeps the matrix
sparse; eliminating ``z`` and ``p`` gives back the stabilised form exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import assembly
from .lagrange import SUPPORTED_DEGREES, FeSpace, build_space
from .mesh import Mesh
from .multiplier import BcKind, MultiplierSpace, restrict_matrix
from .multiplier import build as build_multiplier
from .quadrature import rule
from .solver import DEFAULT_TOL, SolveReport, nested_dissection, solve


@dataclass(eq=False)
class BlockSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    layout: dict[str, slice]
    bc_kind: BcKind
    degree: int
    u_space: FeSpace
    phi_space: FeSpace
    multiplier: MultiplierSpace
    blocks: dict[str, sp.csr_matrix] = field(repr=False, default_factory=dict)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(s.stop - s.start for s in self.layout.values())

    def split(self, x) -> dict[str, np.ndarray]:
        return {name: np.asarray(x)[s] for name, s in self.layout.items()}

    def constraint_residual(self, x) -> float:
        """``||B_u u + B_phi phi|| / (||u|| + ||phi||)``."""
        parts = self.split(x)
        u, phi = parts["u"], parts["phi"]
        r = self.blocks["B_u"] @ u + self.blocks["B_phi"] @ phi
        scale = np.linalg.norm(u) + np.linalg.norm(phi)
        return float(np.linalg.norm(r) / scale) if scale else float(np.linalg.norm(r))

    def ordering(self) -> np.ndarray:
        """Nested-dissection elimination order with every node's unknowns kept together.

        Within a node the order ``z, p, u, phi, lambda`` (or ``phi, lambda, u``)
        gives nonzero diagonal pivots without row interchanges.
        """
        U = self.u_space
        size = U.degree * U.mesh.n
        positions, priority = [], []
        for name, sl in self.layout.items():
            space = self.phi_space if name in ("phi", "lam") else U
            positions.append(np.rint(space.nodes * size).astype(np.int64))
            priority.append(np.full(sl.stop - sl.start, _NODE_PRIORITY[name]))
        return nested_dissection(np.concatenate(positions), np.concatenate(priority), size, stride=U.degree)

    def solve(self, tol: float = DEFAULT_TOL) -> SolveReport:
        return solve(self.matrix, self.rhs, tol=tol, ordering=self.ordering())

    def asymmetry(self) -> float:
        D = self.matrix - self.matrix.T
        return float(abs(D).max()) if D.nnz else 0.0


_NODE_PRIORITY = {"z": 0, "p": 1, "phi": 2, "lam": 3, "u": 4}


def _layout(names, sizes) -> dict[str, slice]:
    out, start = {}, 0
    for name, n in zip(names, sizes):
        out[name] = slice(start, start + n)
        start += n
    return out


LOAD_MODES = ("interpolated", "quadrature")
# b = M I_h f reproduces the reference error tables level by level; an exact
# quadrature load gives the same asymptotic rates with different
# pre-asymptotic errors.
DEFAULT_LOAD = "interpolated"


def _load(space: FeSpace, f: Callable, mode: str | None) -> np.ndarray:
    mode = mode or DEFAULT_LOAD
    if mode == "quadrature":
        return assembly.load_vector(space, f, rule(min(12, 2 * space.degree + 6)))
    if mode == "interpolated":
        return assembly.interpolated_load_vector(space, f)
    raise ValueError(f"unknown load mode {mode!r}; choose from {LOAD_MODES}")


def build_simply_supported(m: Mesh, k: int, f: Callable, load: str | None = None) -> BlockSystem:
    """Rows ``u: [0, 0, K^T]``, ``phi: [0, C, Mq^T]``, ``lambda: [K, Mq, 0]``.

    ``load`` selects how ``(f, v)`` is formed: ``"quadrature"`` or
    ``"interpolated"`` (``M I_h f``, the default).
    """
    S0 = build_space(m, k, homogeneous=True)
    mult = build_multiplier(m, k, BcKind.SIMPLY_SUPPORTED)
    eye = sp.identity(S0.n_dofs, format="csr")
    K = restrict_matrix(assembly.stiffness(S0, mult.full), mult.R, eye)
    Mq = restrict_matrix(assembly.mass(S0, mult.full), mult.R, eye)
    C = assembly.stiffness(S0, S0)

    A = sp.bmat([[None, None, K.T], [None, C, Mq.T], [K, Mq, None]], format="csr")
    d0 = S0.n_dofs
    rhs = np.zeros(3 * d0)
    rhs[:d0] = _load(S0, f, load)
    return BlockSystem(
        matrix=_tidy(A),
        rhs=rhs,
        layout=_layout(("u", "phi", "lam"), (d0, d0, d0)),
        bc_kind=BcKind.SIMPLY_SUPPORTED,
        degree=k,
        u_space=S0,
        phi_space=S0,
        multiplier=mult,
        blocks={"B_u": K, "B_phi": Mq, "C": C},
    )


def build_clamped(
    m: Mesh, k: int, f: Callable, experimental: bool = False, load: str | None = None
) -> BlockSystem:
    """Five-field system in the unknown order ``(u, phi, z, lambda, p)``.

    Raises ``NoInternalTriangleError`` on meshes with ``n <= 2``.
    """
    if k != 1 and not experimental:
        raise ValueError("clamped boundary conditions are validated for k = 1 only; pass experimental=True")
    if k + 1 not in SUPPORTED_DEGREES:
        raise ValueError(f"clamped k = {k} needs a degree-{k + 1} space for u, which is not implemented")
    U = build_space(m, k + 1, homogeneous=True)
    F = build_space(m, k, homogeneous=True)
    mult = build_multiplier(m, k, BcKind.CLAMPED)

    C = assembly.stiffness(F, F)
    Mq1 = assembly.mass(F, F)
    M = assembly.mass(U, U)
    K2 = assembly.stiffness(U, U)
    G = assembly.mass(U, F)  # rows: S^k_0 tests, columns: S^{k+1}_0 trials
    eye_u = sp.identity(U.n_dofs, format="csr")
    eye_f = sp.identity(F.n_dofs, format="csr")
    B_u = restrict_matrix(assembly.stiffness(U, mult.full), mult.R, eye_u)
    B_phi = restrict_matrix(assembly.mass(F, mult.full), mult.R, eye_f)

    A = sp.bmat(
        [
            [None, None, None, B_u.T, K2],
            [None, C + Mq1, -G, B_phi.T, None],
            [None, -G.T, M, None, M],
            [B_u, B_phi, None, None, None],
            [K2, None, M, None, None],
        ],
        format="csr",
    )
    d1, d0 = U.n_dofs, F.n_dofs
    sizes = (d1, d0, d1, d0, d1)
    rhs = np.zeros(sum(sizes))
    rhs[:d1] = _load(U, f, load)
    return BlockSystem(
        matrix=_tidy(A),
        rhs=rhs,
        layout=_layout(("u", "phi", "z", "lam", "p"), sizes),
        bc_kind=BcKind.CLAMPED,
        degree=k,
        u_space=U,
        phi_space=F,
        multiplier=mult,
        blocks={"B_u": B_u, "B_phi": B_phi, "C": C, "Mq": Mq1, "M": M, "K2": K2, "G": G},
    )


def build(
    m: Mesh, k: int, f: Callable, bc: BcKind | str, experimental: bool = False, load: str | None = None
) -> BlockSystem:
    bc = BcKind(bc)
    if bc is BcKind.SIMPLY_SUPPORTED:
        return build_simply_supported(m, k, f, load=load)
    return build_clamped(m, k, f, experimental=experimental, load=load)


def _tidy(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A)
    A.eliminate_zeros()
    A.sort_indices()
    return A
