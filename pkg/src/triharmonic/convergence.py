"""Error norms, observed rates and the refinement-study driver."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import saddle
from .assembly import discrete_laplacian
from .lagrange import FeSpace, interpolate, tabulate
from .manufactured import ManufacturedCase, SeparableField, catalog
from .mesh import build_unit_square, refine
from .multiplier import BcKind
from .quadrature import QuadratureRule, rule
from .solver import DEFAULT_TOL, SolverError

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "elems",
    "e_u_l2", "r_u_l2",
    "e_u_h1", "r_u_h1",
    "e_phi_l2", "r_phi_l2",
    "e_phi_h1", "r_phi_h1",
    "e_lam_l2", "r_lam_l2",
)  # fmt: skip
ERROR_KEYS = ("u_l2", "u_h1", "phi_l2", "phi_h1", "lam_l2")

INITIAL_N = {BcKind.SIMPLY_SUPPORTED: 2, BcKind.CLAMPED: 4}
# Refinements reaching 32768 elements for degree 1 and 8192 for degree 2.
DEFAULT_REFINEMENTS = {(BcKind.SIMPLY_SUPPORTED, 1): 6, (BcKind.SIMPLY_SUPPORTED, 2): 5, (BcKind.CLAMPED, 1): 5}


class StudyError(RuntimeError):
    """A level of a study failed; the message names the level."""


def default_rule(k: int) -> QuadratureRule:
    return rule(min(12, 2 * k + 6))


def _differences(s: FeSpace, coeffs, exact: SeparableField, q: QuadratureRule):
    vals, grads = tabulate(s, coeffs, q.points)
    pts = s.mesh.map_to_physical(q.points)
    x, y = pts[..., 0], pts[..., 1]
    u = exact(x, y)
    ux, uy = exact.gradient(x, y)
    w = q.weights[None, :] * s.mesh.dets[:, None]
    return vals - u, grads - np.stack([ux, uy], axis=-1), u, np.stack([ux, uy], axis=-1), w


def _ratio(num: float, den: float, what: str) -> float:
    if den <= 0.0:
        raise ValueError(f"exact field has zero {what}; relative error undefined")
    return math.sqrt(num / den)


def relative_l2_error(s: FeSpace, coeffs, exact: SeparableField, q: QuadratureRule | None = None) -> float:
    """``||u - u_h||_0 / ||u||_0``."""
    q = q or default_rule(s.degree)
    e, _, u, _, w = _differences(s, coeffs, exact, q)
    return _ratio(math.fsum((w * e**2).ravel()), math.fsum((w * u**2).ravel()), "L2 norm")


def relative_h1_seminorm_error(s: FeSpace, coeffs, exact: SeparableField, q: QuadratureRule | None = None) -> float:
    """``|u - u_h|_1 / |u|_1``."""
    q = q or default_rule(s.degree)
    _, ge, _, gu, w = _differences(s, coeffs, exact, q)
    return _ratio(
        math.fsum((w * (ge**2).sum(-1)).ravel()), math.fsum((w * (gu**2).sum(-1)).ravel()), "H1 seminorm"
    )


def mesh_dependent_error(u_coeffs, phi_coeffs, case: ManufacturedCase, u_space: FeSpace, phi_space: FeSpace,
                         q: QuadratureRule | None = None) -> float:
    """``sqrt(||grad(phi - phi_h)||^2 + ||(phi - phi_h) - Delta_h(I u - u_h)||^2)``.

    ``I u`` is the nodal interpolant of the exact ``u`` on ``u_space``, on
    which ``Delta_h`` acts; the exact ``phi`` enters through quadrature.
    """
    q = q or default_rule(u_space.degree)
    du = interpolate(u_space, case.u) - np.asarray(u_coeffs, dtype=float)
    z = discrete_laplacian(u_space).apply(du)
    e_phi, g_phi, _, _, w = _differences(phi_space, phi_coeffs, case.phi, q)
    z_vals, _ = tabulate(u_space, z, q.points)
    # e_phi is phi_h - phi, so (phi - phi_h) - z = -(e_phi + z).
    grad_term = math.fsum((w * (g_phi**2).sum(-1)).ravel())
    l2_term = math.fsum((w * (e_phi + z_vals) ** 2).ravel())
    return math.sqrt(grad_term + l2_term)


def rate(e_prev: float, e_curr: float) -> float:
    return math.log2(e_prev / e_curr)


@dataclass
class StudyConfig:
    """One refinement study.

    ``refinements`` uniform refinements of the initial mesh give
    ``refinements + 1`` rows.
    """

    bc_kind: BcKind | str
    example: str
    degree: int = 1
    refinements: int | None = None
    quad_degree: int | None = None
    tol: float = DEFAULT_TOL
    initial_n: int | None = None
    experimental: bool = False
    mesh_pattern: str = "diagonal"
    load: str | None = None

    def __post_init__(self):
        self.bc_kind = BcKind(self.bc_kind)
        case = catalog(self.example)
        if BcKind(case.bc_kind) is not self.bc_kind:
            raise ValueError(f"example {self.example!r} is a {case.bc_kind} case, not {self.bc_kind.value}")
        if self.degree not in (1, 2):
            raise ValueError(f"unsupported degree {self.degree}")
        if self.bc_kind is BcKind.CLAMPED and self.degree != 1 and not self.experimental:
            raise ValueError("clamped boundary conditions are validated for degree 1 only")
        if self.bc_kind is BcKind.CLAMPED and self.degree != 1:
            raise ValueError("clamped degree 2 needs cubic elements for u, which are not implemented")
        if self.refinements is None:
            self.refinements = DEFAULT_REFINEMENTS.get((self.bc_kind, self.degree), 4)
        if self.refinements < 2:
            raise ValueError(f"a study needs at least 2 refinements, got {self.refinements}")
        if self.load is not None and self.load not in saddle.LOAD_MODES:
            raise ValueError(f"unknown load mode {self.load!r}")
        if self.initial_n is None:
            self.initial_n = INITIAL_N[self.bc_kind]

    def mesh_n(self, level: int) -> int:
        return self.initial_n * 2**level

    def rule_for(self, k: int) -> QuadratureRule:
        return rule(self.quad_degree) if self.quad_degree else default_rule(k)


@dataclass
class ConvergenceRow:
    elems: int
    n: int
    errors: dict[str, float]
    rates: dict[str, float] = field(default_factory=dict)
    mesh_error: float | None = None
    mesh_rate: float | None = None
    residual: float = 0.0
    constraint_residual: float = 0.0
    seconds: float = 0.0


@dataclass
class LevelSolution:
    """Solved system at one level, kept for exports and diagnostics."""

    system: saddle.BlockSystem
    x: np.ndarray
    residual: float

    def fields(self) -> dict[str, tuple[FeSpace, np.ndarray]]:
        parts = self.system.split(self.x)
        mult = self.system.multiplier
        return {
            "u": (self.system.u_space, parts["u"]),
            "phi": (self.system.phi_space, parts["phi"]),
            "lam": (mult.full, mult.to_full(parts["lam"])),
        }


def solve_level(cfg: StudyConfig, n: int) -> LevelSolution:
    case = catalog(cfg.example)
    m = build_unit_square(n, cfg.mesh_pattern)
    system = saddle.build(m, cfg.degree, case.f, cfg.bc_kind, experimental=cfg.experimental, load=cfg.load)
    report = system.solve(tol=cfg.tol)
    return LevelSolution(system=system, x=report.x, residual=report.residual)


def level_errors(cfg: StudyConfig, sol: LevelSolution) -> ConvergenceRow:
    case = catalog(cfg.example)
    f = sol.fields()
    (U, u), (F, phi), (L, lam) = f["u"], f["phi"], f["lam"]
    qu, qf = cfg.rule_for(U.degree), cfg.rule_for(F.degree)
    errors = {
        "u_l2": relative_l2_error(U, u, case.u, qu),
        "u_h1": relative_h1_seminorm_error(U, u, case.u, qu),
        "phi_l2": relative_l2_error(F, phi, case.phi, qf),
        "phi_h1": relative_h1_seminorm_error(F, phi, case.phi, qf),
        "lam_l2": relative_l2_error(L, lam, case.lam, qf),
    }
    m = U.mesh
    row = ConvergenceRow(
        elems=m.n_triangles,
        n=m.n,
        errors=errors,
        residual=sol.residual,
        constraint_residual=sol.system.constraint_residual(sol.x),
    )
    if cfg.bc_kind is BcKind.CLAMPED:
        row.mesh_error = mesh_dependent_error(u, phi, case, U, F, qu)
    return row


def run_study(cfg: StudyConfig) -> list[ConvergenceRow]:
    rows: list[ConvergenceRow] = []
    m = build_unit_square(cfg.initial_n, cfg.mesh_pattern)
    for level in range(cfg.refinements + 1):
        t0 = time.perf_counter()
        try:
            sol = solve_level(cfg, m.n)
            row = level_errors(cfg, sol)
        except (SolverError, ValueError, ArithmeticError) as exc:
            raise StudyError(f"level {level} (n={m.n}, {2 * m.n * m.n} elements): {exc}") from exc
        row.seconds = time.perf_counter() - t0
        if rows:
            prev = rows[-1]
            row.rates = {k: rate(prev.errors[k], row.errors[k]) for k in ERROR_KEYS}
            if row.mesh_error is not None and prev.mesh_error:
                row.mesh_rate = rate(prev.mesh_error, row.mesh_error)
        log.info("level %d: %d elements, %.2fs", level, row.elems, row.seconds)
        rows.append(row)
        m = refine(m)
    return rows


def _fmt_err(e: float) -> str:
    return f"{e:.2e}"


def _fmt_rate(r: float | None) -> str:
    return "" if r is None else f"{r:.2f}"


def _cells(row: ConvergenceRow) -> list[str]:
    out = [str(row.elems)]
    for k in ERROR_KEYS:
        out += [_fmt_err(row.errors[k]), _fmt_rate(row.rates.get(k))]
    return out


def to_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(_cells(row))
    return buf.getvalue()


def to_markdown(rows: list[ConvergenceRow]) -> str:
    table = [list(CSV_COLUMNS)] + [_cells(r) for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(CSV_COLUMNS))]
    lines = ["| " + " | ".join(c.rjust(w) for c, w in zip(line, widths)) + " |" for line in table]
    lines.insert(1, "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|")
    return "\n".join(lines) + "\n"
