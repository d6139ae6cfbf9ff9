import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triharmonic.mesh import PATTERNS, build_unit_square, internal_triangles, refine, write_mesh

sizes = st.integers(min_value=1, max_value=24)
patterns = st.sampled_from(PATTERNS)


def brute_force_internal(m):
    # A triangle is internal iff none of its vertices has a coordinate equal to 0 or 1.
    out = set()
    for t, tri in enumerate(m.triangles):
        if all(0.0 < c < 1.0 for v in tri for c in m.vertices[v]):
            out.add(t)
    return out


@pytest.mark.parametrize("n, tris, verts", [(2, 8, 9), (4, 32, 25), (1, 2, 4)])
def test_counts(n, tris, verts):
    m = build_unit_square(n)
    assert m.n_triangles == tris and m.n_vertices == verts


def test_single_cell_all_boundary():
    assert build_unit_square(1).boundary_vertex_flags.all()


@pytest.mark.parametrize("bad", [0, -3, 2.0, True, "4"])
def test_rejects_bad_n(bad):
    with pytest.raises(ValueError):
        build_unit_square(bad)


def test_refine_examples():
    m = build_unit_square(2)
    assert refine(m).n_triangles == 32
    assert refine(refine(m)).n_triangles == 128
    m4 = refine(build_unit_square(4))
    assert m4.n == 8 and math.isclose(m4.h, math.sqrt(2) / 8, rel_tol=1e-15)


def test_internal_triangles_examples():
    assert internal_triangles(build_unit_square(2)) == set()
    m3 = build_unit_square(3)
    assert len(internal_triangles(m3)) == 2
    m4 = build_unit_square(4)
    assert internal_triangles(m4) == brute_force_internal(m4)
    assert len(internal_triangles(m4)) == 8


def test_vertex_order_row_major():
    m = build_unit_square(3)
    for j, i in itertools.product(range(4), range(4)):
        assert np.allclose(m.vertices[j * 4 + i], (i / 3, j / 3))


@given(sizes, patterns)
def test_invariants(n, pattern):
    if pattern == "quadrant" and n % 2:
        n += 1
    m = build_unit_square(n, pattern)
    assert m.n_triangles == 2 * n * n and m.n_vertices == (n + 1) ** 2
    assert np.all(m.dets > 0)
    assert abs(m.areas.sum() - 1.0) <= 1e-12
    assert np.allclose(m.areas, 1.0 / (2 * n * n), rtol=1e-13)
    assert m.boundary_vertex_flags.sum() == 4 * n
    on = (np.isclose(m.vertices, 0.0, atol=1e-14) | np.isclose(m.vertices, 1.0, atol=1e-14)).any(axis=1)
    assert np.array_equal(on, m.boundary_vertex_flags)
    assert math.isclose(m.h, math.sqrt(2) / n, rel_tol=1e-14)
    assert internal_triangles(m) == brute_force_internal(m)


@given(st.integers(min_value=1, max_value=12), st.sampled_from(("diagonal", "quadrant")))
def test_refine_is_nested(n, pattern):
    n = 2 * n if pattern == "quadrant" else n
    coarse = build_unit_square(n, pattern)
    fine = refine(coarse)
    assert fine.n == 2 * n and fine.n_triangles == 4 * coarse.n_triangles
    fine_set = {tuple(v) for v in np.round(fine.vertices, 14)}
    assert all(tuple(v) in fine_set for v in np.round(coarse.vertices, 14))
    # Red refinement: every fine triangle lies inside a coarse one.
    tri, ref = coarse.locate(fine.centroids())
    assert np.all(ref >= -1e-12) and np.all(ref.sum(axis=1) <= 1 + 1e-12)
    assert np.bincount(tri, minlength=coarse.n_triangles).tolist() == [4] * coarse.n_triangles


@given(sizes, patterns, st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20))
def test_locate_round_trip(n, pattern, pts):
    if pattern == "quadrant" and n % 2:
        n += 1
    m = build_unit_square(n, pattern)
    pts = np.array(pts)
    tri, ref = m.locate(pts)
    assert np.all(ref >= -1e-9) and np.all(ref.sum(axis=1) <= 1 + 1e-9)
    back = m.origins[tri] + np.einsum("tij,tj->ti", m.jacobians[tri], ref)
    assert np.allclose(back, pts, atol=1e-13)


def test_locate_outside():
    with pytest.raises(ValueError):
        build_unit_square(2).locate([[1.5, 0.2]])


def test_write_mesh(tmp_path):
    m = build_unit_square(2)
    path = tmp_path / "mesh.txt"
    write_mesh(m, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 9 + 8
    assert [float(v) for v in lines[4].split()] == [0.5, 0.5]
    assert [int(v) for v in lines[9].split()] == list(m.triangles[0])
