"""Command-line interface: refinement studies, single solves and matrix exports.

Exit status is 0 on success, 2 on usage errors and 1 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import assembly
from .convergence import (
    INITIAL_N,
    LevelSolution,
    StudyConfig,
    StudyError,
    level_errors,
    run_study,
    solve_level,
    to_csv,
    to_markdown,
)
from .manufactured import CATALOG, catalog
from .mesh import PATTERNS, build_unit_square
from .multiplier import BcKind, NoInternalTriangleError
from .saddle import LOAD_MODES, build
from .solver import DEFAULT_TOL, SolverError

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bc", required=True, choices=[b.value for b in BcKind], help="boundary conditions")
    p.add_argument("--example", required=True, choices=sorted(CATALOG), help="manufactured solution id")
    p.add_argument("--degree", type=int, choices=(1, 2), default=1, help="polynomial degree k (default 1)")
    p.add_argument("--quad-degree", type=int, default=None, metavar="D",
                   help="quadrature degree for error norms, 1..12 (default min(12, 2k+6))")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"relative residual tolerance (default {DEFAULT_TOL:g})")
    p.add_argument("--experimental", action="store_true", help="lift the degree-1 gate for clamped conditions (k = 2 still needs cubic u, not implemented)")
    p.add_argument("--mesh-pattern", choices=PATTERNS, default="diagonal", help="cell diagonal pattern (default diagonal)")
    p.add_argument("--load", choices=LOAD_MODES, default=None,
                   help="right-hand side: interpolated (M I_h f, default) or quadrature")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triharmonic",
        description="Mixed finite element solver for -Delta^3 u = f on the unit square.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("study", help="run a refinement study and print the error table")
    _common(p)
    p.add_argument("--levels", type=int, default=None, metavar="R",
                   help="number of uniform refinements of the initial mesh, >= 2; the table has R+1 rows "
                        "(default: 6 for simply supported k=1, 5 otherwise)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv", help="table format (default csv)")

    p = sub.add_parser("solve", help="solve on one mesh and dump nodal values of u, phi and lambda as CSV")
    _common(p)
    p.add_argument("--levels", type=int, default=0, metavar="R",
                   help="refinements of the initial mesh (n = 2 * 2^R simply supported, 4 * 2^R clamped; default 0)")

    p = sub.add_parser("export-matrix", help="write the saddle-point matrix as 'row col value' lines")
    _common(p)
    p.add_argument("--levels", type=int, default=0, metavar="R", help="refinements of the initial mesh (default 0)")
    p.add_argument("--rhs-out", type=Path, default=None, help="also write the right-hand side, one value per line")
    return parser


def _config(args, refinements) -> StudyConfig:
    return StudyConfig(
        bc_kind=args.bc,
        example=args.example,
        degree=args.degree,
        refinements=refinements,
        quad_degree=args.quad_degree,
        tol=args.tol,
        experimental=args.experimental,
        mesh_pattern=args.mesh_pattern,
        load=args.load,
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _nodal_dump(sol: LevelSolution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("field", "x", "y", "value"))
    for name, (space, coeffs) in sol.fields().items():
        for (x, y), v in zip(space.nodes, coeffs):
            w.writerow((name, f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"))
    return buf.getvalue()


def _run(args, parser) -> int:
    if args.quad_degree is not None and not 1 <= args.quad_degree <= 12:
        parser.error("--quad-degree must be between 1 and 12")
    if args.command == "study":
        if args.levels is not None and args.levels < 2:
            parser.error("--levels must be at least 2 for a study")
        refinements = args.levels
    else:
        if args.levels < 0:
            parser.error("--levels must be non-negative")
        refinements = None
    try:
        cfg = _config(args, refinements)
    except ValueError as exc:
        parser.error(str(exc))

    if args.command == "study":
        rows = run_study(cfg)
        _emit(to_markdown(rows) if args.format == "markdown" else to_csv(rows), args.out)
        last = rows[-1]
        if last.mesh_rate is not None:
            print(f"mesh-dependent error {last.mesh_error:.3e}, order {last.mesh_rate:.2f}", file=sys.stderr)
        return EXIT_OK

    n = INITIAL_N[cfg.bc_kind] * 2**args.levels
    if args.command == "solve":
        sol = solve_level(cfg, n)
        row = level_errors(cfg, sol)
        _emit(_nodal_dump(sol), args.out)
        errs = " ".join(f"{k}={v:.3e}" for k, v in row.errors.items())
        print(f"n={n} elements={row.elems} residual={row.residual:.2e} {errs}", file=sys.stderr)
        return EXIT_OK

    if args.out is None:
        parser.error("export-matrix needs --out")
    system = build(build_unit_square(n, cfg.mesh_pattern), cfg.degree, catalog(cfg.example).f, cfg.bc_kind,
                   experimental=cfg.experimental, load=cfg.load)
    assembly.write_coo(system.matrix, args.out)
    if args.rhs_out is not None:
        args.rhs_out.write_text("".join(f"{v:.17g}\n" for v in system.rhs))
    sizes = ", ".join(f"{k}={s.stop - s.start}" for k, s in system.layout.items())
    print(f"n={n} size={system.size} nnz={system.matrix.nnz} blocks: {sizes}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return _run(args, parser)
    except (StudyError, SolverError, NoInternalTriangleError, ArithmeticError) as exc:
        print(f"triharmonic: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
