"""Acceptance criteria, each at its stated tolerance.

Every test appends one ``criterion N: PASS/FAIL ...`` line that is printed in
the terminal summary. Run directly with ``python3 tests/test_acceptance.py``
or through pytest. The full module takes about two minutes on one core.
"""

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
import reference_tables as ref  # noqa: E402
from triharmonic.assembly import discrete_laplacian  # noqa: E402
from triharmonic.convergence import StudyConfig, run_study  # noqa: E402
from triharmonic.lagrange import build_space, interpolate  # noqa: E402
from triharmonic.manufactured import CATALOG, catalog  # noqa: E402
from triharmonic.mesh import build_unit_square  # noqa: E402
from triharmonic.multiplier import build as build_multiplier  # noqa: E402
from triharmonic.quadrature import rule  # noqa: E402
from triharmonic.saddle import build  # noqa: E402

pytestmark = pytest.mark.slow

_STUDIES: dict = {}


def study(bc, cid, k, refinements):
    key = (bc, cid, k, refinements)
    if key not in _STUDIES:
        t0 = time.perf_counter()
        rows = run_study(StudyConfig(bc, cid, degree=k, refinements=refinements))
        _STUDIES[key] = (rows, time.perf_counter() - t0)
    return _STUDIES[key]


def final(rows, elems):
    (row,) = [r for r in rows if r.elems == elems]
    return row


class Checks:
    """Collects named checks; the criterion passes only if all of them do."""

    def __init__(self, number):
        self.number = number
        self.failures: list[str] = []
        self.notes: list[str] = []

    def within(self, name, got, target, tol):
        ok = abs(got - target) <= tol
        self.notes.append(f"{name} {got:.2f}")
        if not ok:
            self.failures.append(f"{name} {got:.3f} not within {target}+-{tol}")

    def at_least(self, name, got, bound):
        self.notes.append(f"{name} {got:.2f}")
        if not got >= bound:
            self.failures.append(f"{name} {got:.3f} < {bound}")

    def true(self, name, ok, detail=""):
        if not ok:
            self.failures.append(f"{name} {detail}".strip())

    def report(self):
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures) if self.failures else ", ".join(self.notes)
        line = f"criterion {self.number}: {status} {detail}"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
        assert not self.failures, line


def test_criterion_1_simply_supported_linear():
    rows, secs = study("simply-supported", "ss1", 1, 6)
    r = final(rows, 32768).rates
    c = Checks(1)
    for key, target in (("u_l2", 2.00), ("phi_l2", 2.00), ("lam_l2", 2.00), ("phi_h1", 1.16), ("u_h1", 1.89)):
        c.within(key, r[key], target, 0.15)
    c.true("runtime", secs < 120, f"{secs:.0f}s")
    c.notes.append(f"{secs:.0f}s")
    c.report()


def test_criterion_2_simply_supported_quadratic():
    rows, secs = study("simply-supported", "ss1", 2, 5)
    r = final(rows, 8192).rates
    c = Checks(2)
    c.within("phi_h1", r["phi_h1"], 1.99, 0.15)
    c.within("lam_l2", r["lam_l2"], 3.04, 0.2)
    c.at_least("phi_l2", r["phi_l2"], 3.0)
    c.at_least("u_l2", r["u_l2"], 3.0)
    c.true("runtime", secs < 120, f"{secs:.0f}s")
    c.notes.append(f"{secs:.0f}s")
    c.report()


def _magnitudes(c, rows, table, label):
    # phi H1 of this case is not a relative error in the reference table: rates only.
    worst = 0.0
    for key in ("u_l2", "u_h1", "phi_l2", "lam_l2"):
        ratios = np.array([row.errors[key] / ref.row(table, row.elems)[key] for row in rows])
        bad = np.abs(ratios - 1) > 0.10
        worst = max(worst, float(np.max(np.abs(ratios - 1))))
        if bad.any():
            c.failures.append(
                f"{label} {key} ours/table {ratios.min():.2f}..{ratios.max():.2f}, {bad.sum()}/{len(rows)} levels off by >10%"
            )
    c.notes.append(f"{label} worst deviation {100 * worst:.1f}%")


def test_criterion_3a_ss3_rates():
    lin, _ = study("simply-supported", "ss3", 1, 6)
    quad, _ = study("simply-supported", "ss3", 2, 5)
    c = Checks("3 (rates)")
    r = final(lin, 32768).rates
    c.within("k=1 u_l2", r["u_l2"], 2.00, 0.1)
    c.within("k=1 u_h1", r["u_h1"], 1.00, 0.05)
    c.within("k=1 lam_l2", r["lam_l2"], 2.00, 0.1)
    r = final(quad, 8192).rates
    c.within("k=2 u_l2", r["u_l2"], 3.02, 0.15)
    c.within("k=2 phi_l2", r["phi_l2"], 3.01, 0.15)
    c.within("k=2 lam_l2", r["lam_l2"], 3.00, 0.15)
    c.within("k=2 phi_h1", r["phi_h1"], 2.00, 0.1)
    c.report()


def test_criterion_3b_ss3_linear_magnitudes():
    lin, _ = study("simply-supported", "ss3", 1, 6)
    c = Checks("3 (k=1 magnitudes)")
    _magnitudes(c, lin, ref.SS3_LINEAR, "k=1")
    c.report()


def test_criterion_3c_ss3_quadratic_magnitudes():
    # Known red: L2 errors are about 0.7 of the reference values at every level, u H1 up to 1.5 above.
    quad, _ = study("simply-supported", "ss3", 2, 5)
    c = Checks("3 (k=2 magnitudes)")
    _magnitudes(c, quad, ref.SS3_QUADRATIC, "k=2")
    c.report()


def _clamped(number, cid, targets):
    rows, secs = study("clamped", cid, 1, 5)
    r = final(rows, 32768).rates
    c = Checks(number)
    for key, target in targets:
        c.within(key, r[key], target, 0.1 if key == "phi_h1" else 0.25)
    c.true("runtime", secs < 240, f"{secs:.0f}s")
    c.notes.append(f"{secs:.0f}s")
    c.report()


def test_criterion_4_clamped_example_1():
    _clamped(4, "cl1", (("u_l2", 2.11), ("phi_l2", 2.13), ("phi_h1", 1.00), ("lam_l2", 2.36)))


def test_criterion_5_clamped_example_2():
    _clamped(5, "cl2", (("u_l2", 2.11), ("phi_h1", 1.00), ("lam_l2", 2.36)))


def test_criterion_6_mesh_dependent_order():
    rows, _ = study("clamped", "cl1", 1, 5)
    c = Checks(6)
    c.within("mesh-dependent order", rows[-1].mesh_rate, 1.0, 0.2)
    c.report()


def _property_suite(c):
    # Symmetry, solve and constraint residuals.
    for bc, cid, k in (("simply-supported", "ss2", 1), ("simply-supported", "ss3", 2), ("clamped", "cl2", 1)):
        s = build(build_unit_square(8), k, catalog(cid).f, bc)
        asym = s.asymmetry() / abs(s.matrix).max()
        c.true(f"{bc} k={k} symmetry", asym <= 1e-12, f"{asym:.1e}")
        rep = s.solve()
        c.true(f"{bc} k={k} solve residual", rep.residual <= 1e-10, f"{rep.residual:.1e}")
        cr = s.constraint_residual(rep.x)
        c.true(f"{bc} k={k} constraint residual", cr <= 1e-9, f"{cr:.1e}")

    # Quadrature exactness on the reference triangle: x^a y^b integrates to a! b! / (a + b + 2)!.
    for d in range(1, 13):
        q = rule(d)
        for a in range(d + 1):
            for b in range(d + 1 - a):
                exact = Fraction(math.factorial(a) * math.factorial(b), math.factorial(a + b + 2))
                got = float(np.sum(q.weights * q.points[:, 0] ** a * q.points[:, 1] ** b))
                c.true(f"rule {d} monomial ({a},{b})", abs(got - float(exact)) <= 1e-14 * max(1, float(exact)))

    # Multiplier dimension and partition of unity.
    for bc, k in (("simply-supported", 1), ("simply-supported", 2), ("clamped", 1), ("clamped", 2)):
        m = build_unit_square(6)
        mult = build_multiplier(m, k, bc)
        dim0 = build_space(m, k, homogeneous=True).n_dofs
        c.true(f"{bc} k={k} multiplier dim", mult.n_dofs == dim0, f"{mult.n_dofs} != {dim0}")
        if bc == "clamped":
            cols = np.asarray(mult.R.sum(axis=0)).ravel()
            c.true(f"clamped k={k} partition of unity", np.allclose(cols, 1.0, atol=1e-14))

    # Discrete Laplacian defining equation M z = -K w.
    for k in (1, 2):
        s = build_space(build_unit_square(8), k, homogeneous=True)
        w = interpolate(s, catalog("ss3").u)
        op = discrete_laplacian(s)
        z = op.apply(w)
        res = np.linalg.norm(op.M @ z + op.K @ w) / np.linalg.norm(op.K @ w)
        c.true(f"Delta_h k={k} residual", res <= 1e-12, f"{res:.1e}")

    # Clamped elimination oracle and the finite-difference derivative chains.
    import test_manufactured
    import test_saddle

    test_saddle.test_clamped_elimination_matches_stabilised_form()
    for cid in sorted(CATALOG):
        test_manufactured.test_derivative_chain_finite_differences(cid)


def test_criterion_7_property_suite():
    c = Checks(7)
    t0 = time.perf_counter()
    try:
        _property_suite(c)
    except AssertionError as exc:
        c.failures.append(f"oracle: {exc}")
    secs = time.perf_counter() - t0
    c.true("runtime", secs < 30, f"{secs:.1f}s")
    c.notes.append(f"{secs:.1f}s")
    c.report()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
