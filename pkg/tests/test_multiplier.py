import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from triharmonic.assembly import load_vector, mass
from triharmonic.convergence import relative_l2_error
from triharmonic.lagrange import build_space, eval_fe_function
from triharmonic.mesh import build_unit_square, internal_triangles, refine
from triharmonic.manufactured import Separable1D, SeparableField
from triharmonic.multiplier import BcKind, NoInternalTriangleError, build, restrict_matrix, selection
from triharmonic.quadrature import rule


def test_simply_supported_selection():
    mult = build(build_unit_square(2), 1, "simply-supported")
    assert mult.R.shape == (1, 9)
    assert mult.R.toarray().tolist() == [[0, 0, 0, 0, 1, 0, 0, 0, 0]]


def test_clamped_requires_internal_triangle():
    with pytest.raises(NoInternalTriangleError):
        build(build_unit_square(2), 1, BcKind.CLAMPED)


def barycentric(p, tri):
    a, b, c = tri
    T = np.column_stack([b - a, c - a])
    l1, l2 = np.linalg.solve(T, p - a)
    return np.array([1 - l1 - l2, l1, l2])


def test_clamped_corner_weights_n4():
    m = build_unit_square(4)
    mult = build(m, 1, BcKind.CLAMPED)
    t = mult.host_triangle[0]  # boundary node (0, 0) is full DOF 0
    assert t in internal_triangles(m)
    # Brute force: closest internal centroid, lowest index on ties.
    cands = sorted(internal_triangles(m))
    d = [round(float(np.sum(m.centroids()[c] ** 2)), 12) for c in cands]
    assert t == cands[int(np.argmin(d))]
    alpha = barycentric(np.zeros(2), m.vertices[m.triangles[t]])
    col = mult.R[:, 0].toarray().ravel()
    full = mult.full
    for v, a in zip(m.triangles[t], alpha):
        row = np.flatnonzero(full.interior == v)[0]
        assert col[row] == pytest.approx(a, abs=1e-14)
    assert alpha.sum() == pytest.approx(1.0) and alpha.min() < 0


@given(st.integers(3, 12), st.sampled_from((1, 2)), st.sampled_from(("diagonal", "union-jack")))
def test_clamped_structure(n, k, pattern):
    m = build_unit_square(n, pattern)
    mult = build(m, k, BcKind.CLAMPED)
    full = mult.full
    assert mult.n_dofs == (k * n - 1) ** 2 == build_space(m, k, True).n_dofs
    R = mult.R.toarray()
    interior = full.interior
    assert np.allclose(R[:, interior], np.eye(len(interior)), atol=1e-14)
    assert np.allclose(R.sum(axis=0), 1.0, atol=1e-12)
    # Extra entries sit only in the interior DOFs of the host triangle.
    for b, t in mult.host_triangle.items():
        rows = np.flatnonzero(R[:, b])
        assert set(interior[rows]) <= set(full.cell_dofs[t])


@given(st.integers(3, 8), st.sampled_from((1, 2)),
       st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=10))
def test_clamped_partition_of_unity(n, k, pts):
    mult = build(build_unit_square(n), k, BcKind.CLAMPED)
    v, _ = eval_fe_function(mult.full, mult.to_full(np.ones(mult.n_dofs)), np.array(pts))
    assert np.allclose(v, 1.0, atol=1e-12)


def test_restrict_matrix_examples():
    m = build_unit_square(4)
    S = build_space(m, 1, False)
    M = mass(S, S)
    interior = build_space(m, 1, True)
    sel = selection(interior)
    assert np.allclose(restrict_matrix(M, sel, sel).toarray(), mass(interior, interior).toarray(), atol=1e-15)
    mult = build(m, 1, BcKind.CLAMPED)
    Mr = restrict_matrix(M, mult.R, sp.identity(S.n_full, format="csr"))
    assert Mr.sum() == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(ValueError):
        restrict_matrix(M, sel[:, :-1], sel)


def test_restrict_matrix_entrywise():
    rng = np.random.default_rng(1)
    M = sp.csr_matrix(rng.random((5, 4)))
    L = sp.csr_matrix(rng.random((3, 5)))
    Rr = sp.csr_matrix(rng.random((2, 4)))
    expect = np.einsum("ip,pq,jq->ij", L.toarray(), M.toarray(), Rr.toarray())
    assert np.allclose(restrict_matrix(M, L, Rr).toarray(), expect)


@pytest.mark.parametrize("bc", ["simply-supported", "clamped"])
def test_stability_proxy(bc):
    # Restricted mass between multipliers and S_{h,0}^1: extreme singular value ratio stays bounded.
    conds = []
    m = build_unit_square(4)
    for _ in range(3):
        mult = build(m, 1, bc)
        S0 = build_space(m, 1, True)
        B = restrict_matrix(mass(S0, mult.full), mult.R, sp.identity(S0.n_dofs, format="csr")).toarray()
        s = np.linalg.svd(B, compute_uv=False)
        conds.append(s[0] / s[-1])
        m = refine(m)
    assert conds[-1] / conds[0] < 4.0


@pytest.mark.parametrize("bc", ["simply-supported", "clamped"])
def test_approximation_proxy(bc):
    q = Separable1D.polynomial([0, 1, -1])
    lam = SeparableField(((q, q),))
    errs = []
    m = build_unit_square(4)
    for _ in range(3):
        mult = build(m, 1, bc)
        Mfull = mass(mult.full, mult.full)
        G = (mult.R @ Mfull @ mult.R.T).toarray()
        c = np.linalg.solve(G, mult.R @ load_vector(mult.full, lam, rule(8)))
        errs.append(relative_l2_error(mult.full, mult.to_full(c), lam))
        m = refine(m)
    assert np.log2(errs[-2] / errs[-1]) >= 1.0 - 0.05
