"""Ratio of computed errors to the published reference error tables, for both load assemblies.

    python3 scripts/compare_load_modes.py

A ratio of 1.00 means level-by-level agreement. Rates are unaffected by the
load choice; pre-asymptotic magnitudes are not.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import reference_tables as ref  # noqa: E402
from triharmonic import StudyConfig, run_study  # noqa: E402

CASES = [
    ("simply-supported", "ss1", 1, 4, ref.SS1_LINEAR),
    ("simply-supported", "ss3", 1, 4, ref.SS3_LINEAR),
    ("simply-supported", "ss3", 2, 3, ref.SS3_QUADRATIC),
    ("clamped", "cl1", 1, 3, ref.CL1),
    ("clamped", "cl2", 1, 3, ref.CL2),
]


def main():
    for bc, cid, k, refinements, table in CASES:
        for load in ("interpolated", "quadrature"):
            rows = run_study(StudyConfig(bc, cid, degree=k, refinements=refinements, load=load))
            print(f"{cid} k={k} load={load}")
            print("  elems " + " ".join(f"{c:>7}" for c in ref.COLUMNS))
            for row in rows:
                expected = ref.row(table, row.elems)
                print(f"  {row.elems:5d} " + " ".join(f"{row.errors[c] / expected[c]:7.2f}" for c in ref.COLUMNS))
        print()


if __name__ == "__main__":
    main()
