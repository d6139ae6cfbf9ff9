"""Run every refinement study at its default depth and write CSV and markdown tables.

    python3 scripts/reproduce_tables.py --out results

Takes about 90 seconds on one core.
"""

import argparse
import logging
import time
from pathlib import Path

from triharmonic import StudyConfig, run_study, to_csv, to_markdown

STUDIES = [
    ("simply-supported", "ss1", 1),
    ("simply-supported", "ss1", 2),
    ("simply-supported", "ss2", 1),
    ("simply-supported", "ss2", 2),
    ("simply-supported", "ss3", 1),
    ("simply-supported", "ss3", 2),
    ("clamped", "cl1", 1),
    ("clamped", "cl2", 1),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--load", choices=("interpolated", "quadrature"), default=None)
    ap.add_argument("--only", nargs="*", default=None, help="example ids to run, e.g. ss3 cl1")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    for bc, cid, k in STUDIES:
        if args.only and cid not in args.only:
            continue
        t0 = time.perf_counter()
        rows = run_study(StudyConfig(bc, cid, degree=k, load=args.load))
        stem = args.out / f"{cid}_k{k}"
        stem.with_suffix(".csv").write_text(to_csv(rows))
        md = to_markdown(rows)
        if rows[-1].mesh_rate is not None:
            md += f"\nmesh-dependent error {rows[-1].mesh_error:.3e}, order {rows[-1].mesh_rate:.2f}\n"
        stem.with_suffix(".md").write_text(md)
        print(f"## {cid} k={k} ({bc}, {time.perf_counter() - t0:.0f}s)\n\n{md}")


if __name__ == "__main__":
    main()
