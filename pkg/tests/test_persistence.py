import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phmht.complexes import Filtration, PointCloud, alpha_filtration_2d, build_distance_matrix, vietoris_rips
from phmht.errors import GuardError, InputError, ParameterError
from phmht.persistence import (
    PersistenceDiagram,
    PersistentBettiQuery,
    betti_rank_oracle,
    persistent_betti,
    read_diagram_csv,
    reduce,
    write_diagram_csv,
)

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
small_clouds = arrays(np.float64, st.tuples(st.integers(1, 8), st.just(2)),
                      elements=st.floats(0, 1, allow_nan=False, width=32))


def _square_rips():
    return vietoris_rips(build_distance_matrix(PointCloud(SQUARE)), 2, 2.0)


def test_triangle_rips_diagram():
    f = vietoris_rips(np.ones((3, 3)) - np.eye(3), 2, 2.0)
    d = reduce(f)
    assert sorted(d.points(0)) == [(0.0, 1.0, 0), (0.0, 1.0, 0), (0.0, math.inf, 0)]
    # the 1-cycle is born and killed at the same value
    assert all(b == x for b, x, _ in d.points(1))


def test_square_rips_diagram():
    d = reduce(_square_rips())
    h1 = [(b, x) for b, x, _ in d.points(1) if x > b]
    assert len(h1) == 1
    assert h1[0] == pytest.approx((1.0, math.sqrt(2)))


def test_single_vertex():
    d = reduce(alpha_filtration_2d(PointCloud([(0.3, 0.4)])))
    assert d.points() == [(0.0, math.inf, 0)]


def test_persistent_betti_examples():
    assert persistent_betti(PersistenceDiagram.from_points([(0, math.inf, 0)]),
                            PersistentBettiQuery(0, 0, 5)) == 1
    d = PersistenceDiagram.from_points([(1, math.sqrt(2), 1)])
    assert persistent_betti(d, PersistentBettiQuery(1, 1.2, 1.3)) == 1
    assert persistent_betti(d, PersistentBettiQuery(1, 0.5, 1.3)) == 0
    with pytest.raises(ParameterError):
        PersistentBettiQuery(1, 2.0, 1.0)


def test_oracle_examples():
    f = _square_rips()
    assert betti_rank_oracle(f, PersistentBettiQuery(1, 1, 1.2)) == 1
    empty = Filtration.from_arrays([np.empty((0, 1), dtype=np.int64)], [np.empty(0)], 0)
    assert betti_rank_oracle(empty, PersistentBettiQuery(0, 0, 1)) == 0
    # r = s gives ordinary Betti numbers: one component, one loop at t = 1
    assert betti_rank_oracle(f, PersistentBettiQuery(0, 1, 1)) == 1
    assert betti_rank_oracle(f, PersistentBettiQuery(0, 0, 0)) == 4


def test_oracle_size_guard():
    pts = PointCloud(np.random.default_rng(0).uniform(size=(200, 2)))
    with pytest.raises(GuardError):
        betti_rank_oracle(alpha_filtration_2d(pts), PersistentBettiQuery(1, 0.1, 0.1))


def test_filtration_violation_rejected():
    with pytest.raises(InputError):
        Filtration.from_arrays([np.array([[0], [1]]), np.array([[0, 1]])],
                               [np.array([0.0, 3.0]), np.array([1.0])], 2)


def test_diagram_validation():
    with pytest.raises(InputError):
        PersistenceDiagram.from_points([(2, 1, 0)])
    with pytest.raises(InputError):
        PersistenceDiagram.from_points([(0, 1, -1)])


def test_csv_round_trip(tmp_path):
    d = PersistenceDiagram.from_points([(0, 0.25, 0), (0, math.inf, 0), (0.1, 0.3, 1)])
    text = write_diagram_csv(d, tmp_path / "d.csv")
    assert text.splitlines()[0] == "dim,birth,death"
    assert "inf" in text
    assert read_diagram_csv(tmp_path / "d.csv").same_multiset(d)
    assert read_diagram_csv(text).same_multiset(d)
    with pytest.raises(InputError):
        read_diagram_csv("dim,birth,death\n0,x,1\n")


def _grid(f):
    vals = np.unique(f.values)
    picks = np.unique(np.r_[0.0, vals[np.linspace(0, vals.size - 1, 4).astype(int)]])
    return [(r, s) for r in picks for s in picks if r <= s]


@settings(max_examples=80, deadline=None)
@given(small_clouds)
def test_reduction_matches_rank_oracle(pts):
    cloud = PointCloud(pts)
    for f in (alpha_filtration_2d(cloud), vietoris_rips(build_distance_matrix(cloud), 2, 2.0)):
        d = reduce(f)
        for q in (0, 1):
            for r, s in _grid(f):
                query = PersistentBettiQuery(q, r, s)
                assert persistent_betti(d, query) == betti_rank_oracle(f, query)


@settings(max_examples=60, deadline=None)
@given(small_clouds, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_persistent_betti_monotone(pts, r, s1, s2):
    d = reduce(alpha_filtration_2d(PointCloud(pts)))
    s_lo, s_hi = sorted((max(r, s1), max(r, s2)))
    for q in (0, 1):
        assert persistent_betti(d, PersistentBettiQuery(q, r, s_hi)) <= \
            persistent_betti(d, PersistentBettiQuery(q, r, s_lo))
        assert persistent_betti(d, PersistentBettiQuery(q, min(r, s1) / 2, s_lo)) <= \
            persistent_betti(d, PersistentBettiQuery(q, min(r, s1), s_lo))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)),
              elements=st.floats(0, 1, allow_nan=False, width=32)), st.floats(0, 1))
def test_euler_characteristic(pts, t):
    f = alpha_filtration_2d(PointCloud(pts))
    d = reduce(f)
    chi = sum((-1) ** k for k, x in zip(f.dims, f.values) if x <= t)
    betti = sum((-1) ** q * persistent_betti(d, PersistentBettiQuery(q, t, t)) for q in (0, 1, 2))
    assert betti == chi


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.just(2)),
              elements=st.floats(0, 1, allow_nan=False, width=32)))
def test_h0_at_zero_counts_vertices_and_complex_is_connected(pts):
    f = alpha_filtration_2d(PointCloud(pts))
    d = reduce(f)
    assert f.n_vertices <= np.unique(pts, axis=0).shape[0]
    assert persistent_betti(d, PersistentBettiQuery(0, 0, 0)) == f.n_vertices
    assert sum(1 for _, x, k in d.points(0) if math.isinf(x)) == 1
