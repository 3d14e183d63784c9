import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phmht.complexes import (
    Filtration,
    PointCloud,
    alpha_filtration_2d,
    build_distance_matrix,
    delaunay_2d,
    vietoris_rips,
)
from phmht.errors import InputError, ParameterError

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]

planar = arrays(np.float64, st.tuples(st.integers(1, 12), st.just(2)),
                elements=st.floats(-10, 10, allow_nan=False, width=32))


def _values(f, dim):
    return sorted(x for v, x in zip(f.vertices, f.values) if len(v) == dim + 1)


def _incircle(a, b, c, d):
    """Exact incircle determinant (positive: d strictly inside the
    circumcircle of the counter-clockwise triangle abc) and its term scale."""
    a, b, c, d = ([Fraction(float(v)) for v in p] for p in (a, b, c, d))
    rows = [(p[0] - d[0], p[1] - d[1]) for p in (a, b, c)]
    rows = [(x, y, x * x + y * y) for x, y in rows]
    (ax, ay, aw), (bx, by, bw), (cx, cy, cw) = rows
    det = ax * (by * cw - bw * cy) - ay * (bx * cw - bw * cx) + aw * (bx * cy - by * cx)
    orient = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(abs(v) for r in rows for v in r) ** 2
    return (det if orient > 0 else -det), scale


def test_point_cloud_validation():
    assert PointCloud([[1.0, 2.0]]).ambient_dim == 2
    with pytest.raises(InputError):
        PointCloud([[0.0, np.nan]])
    with pytest.raises(InputError):
        PointCloud(np.empty((0, 2)))


def test_distance_matrix_examples():
    np.testing.assert_allclose(build_distance_matrix(PointCloud([(0, 0), (3, 4)])), [[0, 5], [5, 0]])
    assert build_distance_matrix(PointCloud([(7, 7)])).tolist() == [[0.0]]
    dm = build_distance_matrix(PointCloud(SQUARE))
    off = sorted(dm[np.triu_indices(4, 1)])
    np.testing.assert_allclose(off, [1, 1, 1, 1, math.sqrt(2), math.sqrt(2)])


def test_rips_examples():
    f = vietoris_rips(np.array([[0, 1.0], [1.0, 0]]), 1, 2.0)
    assert _values(f, 0) == [0, 0] and _values(f, 1) == [1.0]

    tri = np.ones((3, 3)) - np.eye(3)
    f = vietoris_rips(tri, 2, 2.0)
    assert _values(f, 1) == [1, 1, 1] and _values(f, 2) == [1]

    f = vietoris_rips(build_distance_matrix(PointCloud(SQUARE)), 2, 1.2)
    assert _values(f, 1) == [1, 1, 1, 1] and _values(f, 2) == []


def test_rips_matches_subset_enumeration():
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(7, 2))
    dm = build_distance_matrix(PointCloud(pts))
    f = vietoris_rips(dm, 3, 0.6)
    expected = set()
    for k in range(1, 5):
        for s in itertools.combinations(range(7), k):
            if all(dm[a, b] <= 0.6 for a, b in itertools.combinations(s, 2)):
                expected.add(s)
    assert set(f.vertices) == expected


def test_rips_parameter_errors():
    with pytest.raises(ParameterError):
        vietoris_rips(np.zeros((2, 2)), -1, 1.0)
    with pytest.raises(ParameterError):
        vietoris_rips(np.zeros((2, 2)), 1, 0.0)


def test_delaunay_examples():
    assert delaunay_2d(PointCloud([(0, 0), (1, 0), (0, 1)])).shape == (1, 3)
    tris = delaunay_2d(PointCloud(SQUARE))
    assert tris.shape == (2, 3)
    shared = set(map(tuple, tris.tolist()))
    a, b = (set(t) for t in shared)
    assert len(a & b) == 2
    assert delaunay_2d(PointCloud([(0, 0), (1, 1), (2, 2), (3, 3)])).shape == (0, 3)


def test_alpha_examples():
    eq = PointCloud([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    f = alpha_filtration_2d(eq)
    np.testing.assert_allclose(_values(f, 1), [0.5] * 3)
    np.testing.assert_allclose(_values(f, 2), [1 / math.sqrt(3)])

    f = alpha_filtration_2d(PointCloud(SQUARE))
    np.testing.assert_allclose(_values(f, 1), [0.5] * 4 + [math.sqrt(2) / 2])
    np.testing.assert_allclose(_values(f, 2), [math.sqrt(2) / 2] * 2)

    f = alpha_filtration_2d(PointCloud([(3, 3)]))
    assert f.vertices == ((0,),) and f.values.tolist() == [0.0]


def test_alpha_obtuse_edge_takes_triangle_value():
    # long edge of an obtuse triangle is attached: enters with the triangle
    f = alpha_filtration_2d(PointCloud([(0, 0), (4, 0), (2, 0.5)]))
    vals = dict(zip(f.vertices, f.values))
    assert vals[(0, 1)] == pytest.approx(vals[(0, 1, 2)])
    assert vals[(0, 1)] > 2.0


def test_alpha_squared_matches_radius():
    pts = PointCloud(np.random.default_rng(0).uniform(size=(30, 2)))
    a, b = alpha_filtration_2d(pts), alpha_filtration_2d(pts, squared=True)
    assert a.vertices == b.vertices
    np.testing.assert_allclose(b.values, a.values ** 2)


def test_duplicates_are_merged_with_note():
    f = alpha_filtration_2d(PointCloud([(0, 0), (0, 0), (1, 0), (0, 1)]))
    assert f.n_vertices == 3
    assert f.notes and "duplicate" in f.notes[0]


def test_collinear_alpha_is_a_path():
    f = alpha_filtration_2d(PointCloud([(0, 0), (2, 0), (1, 0), (3, 0)]))
    assert _values(f, 1) == [0.5, 0.5, 0.5]
    assert _values(f, 2) == []


def test_from_arrays_rejects_missing_face():
    with pytest.raises(InputError):
        Filtration.from_arrays([np.array([[0], [1]]), np.array([[0, 2]])],
                               [np.zeros(2), np.array([1.0])], 3)


def test_from_arrays_rejects_late_face():
    with pytest.raises(InputError):
        Filtration.from_arrays([np.array([[0], [1]]), np.array([[0, 1]])],
                               [np.array([0.0, 2.0]), np.array([1.0])], 2)


@settings(max_examples=60, deadline=None)
@given(planar)
def test_alpha_filtration_property(pts):
    f = alpha_filtration_2d(PointCloud(pts))
    pos = {v: i for i, v in enumerate(f.vertices)}
    for j, v in enumerate(f.vertices):
        for face in itertools.combinations(v, len(v) - 1):
            if face:
                assert f.values[pos[face]] <= f.values[j]
                assert pos[face] < j


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 25), st.just(2)),
              elements=st.floats(0, 1, allow_nan=False)))
def test_delaunay_empty_circumcircle(pts):
    pts = np.unique(pts, axis=0)
    tris = delaunay_2d(PointCloud(pts))
    for t in tris:
        for k in set(range(len(pts))) - set(t.tolist()):
            det, scale = _incircle(*pts[t], pts[k])
            assert det <= 1e-9 * scale
