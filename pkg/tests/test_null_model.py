import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phmht.complexes import PointCloud
from phmht.errors import InputError, ParameterError
from phmht.metrics import InvariantSpec
from phmht.mht import cloud_invariant
from phmht.null_model import (
    Box,
    NullModelSpec,
    WindowShape,
    derive_rng,
    estimate_box,
    sample_noisy_circle,
    sample_poisson_window,
    sample_uniform,
    stable_key,
)


def test_estimate_box_examples():
    b = estimate_box(PointCloud([(0.0, 0.0), (1.0, 1.0)]))
    assert b.lower == (-1.0, -1.0) and b.upper == (2.0, 2.0)

    pts = np.column_stack([np.linspace(0, 10, 101), np.linspace(10, 0, 101)])
    b = estimate_box(PointCloud(pts))
    np.testing.assert_allclose(b.lower, [-0.1, -0.1])
    np.testing.assert_allclose(b.upper, [10.1, 10.1])

    big = np.random.default_rng(0).uniform(size=(10_000, 2))
    b = estimate_box(PointCloud(big))
    np.testing.assert_allclose(b.lower, 0, atol=0.01)
    np.testing.assert_allclose(b.upper, 1, atol=0.01)


def test_estimate_box_degenerate_coordinate(caplog):
    b = estimate_box(PointCloud([(0.0, 3.0), (1.0, 3.0)]))
    assert b.lower[1] < 3.0 < b.upper[1]
    assert "degenerate" in caplog.text
    with pytest.raises(InputError):
        estimate_box(PointCloud([(0.0, 0.0)]))


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.just(2)),
              elements=st.floats(-100, 100, allow_nan=False)).filter(
                  lambda a: np.all(np.ptp(a, axis=0) > 1e-3)),
       st.floats(-50, 50), st.floats(0.1, 10))
def test_estimate_box_equivariant(pts, shift, scale):
    b = estimate_box(PointCloud(pts))
    t = estimate_box(PointCloud(pts * scale + shift))
    np.testing.assert_allclose(t.lower, np.array(b.lower) * scale + shift, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(t.upper, np.array(b.upper) * scale + shift, rtol=1e-9, atol=1e-9)


def test_box_validation():
    with pytest.raises(ParameterError):
        Box((0, 0), (1, 0))
    with pytest.raises(ParameterError):
        Box((0,), (math.inf,))
    assert Box.from_json(Box.square(2).to_json()) == Box.square(2)
    spec = NullModelSpec(Box.square(1), 5, 9)
    assert NullModelSpec.from_json(spec.to_json()) == spec


def test_sample_uniform_examples():
    spec = NullModelSpec(Box.square(1), 1, 7)
    c = sample_uniform(spec, 0)
    assert len(c) == 1 and np.all((c.points >= 0) & (c.points <= 1))
    big = NullModelSpec(Box.square(1), 100_000, 7)
    np.testing.assert_allclose(sample_uniform(big, 3).points.mean(axis=0), 0.5, atol=0.005)
    np.testing.assert_array_equal(sample_uniform(spec, (2, 5)).points, sample_uniform(spec, (2, 5)).points)
    assert not np.array_equal(sample_uniform(spec, 1).points, sample_uniform(spec, 2).points)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(1e-3, 10), st.integers(1, 50), st.integers(0, 2**32))
def test_sample_uniform_inside_box(lo, side, n, idx):
    box = Box((lo, lo), (lo + side, lo + 2 * side))
    pts = sample_uniform(NullModelSpec(box, n, 1), idx).points
    assert np.all(pts >= box.lower) and np.all(pts <= box.upper)


def test_poisson_window_count_mean():
    unit = WindowShape("box", (1.0, 1.0))
    counts = [sample_poisson_window(unit, 1.0, (11, i)).shape[0] for i in range(100_000)]
    assert np.mean(counts) == pytest.approx(1.0, abs=0.02)


def test_poisson_window_support_and_errors():
    disk = WindowShape("disk", (0.7,), scale=2.0)
    for i in range(20):
        pts = sample_poisson_window(disk, 30.0, (3, i))
        assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 1.4 + 1e-12)
    tri = WindowShape("convex_polygon", (0, 0, 2, 0, 0, 2))
    assert tri.volume == pytest.approx(2.0)
    assert np.all(tri.contains(sample_poisson_window(tri, 50.0, 4)))
    with pytest.raises(ParameterError):
        WindowShape("convex_polygon", (0, 0, 1, 1, 2, 2))
    with pytest.raises(ParameterError):
        WindowShape("convex_polygon", (0, 0, 2, 0, 1, 0.2, 1, 2))
    with pytest.raises(ParameterError):
        sample_poisson_window(disk, 0.0, 1)


def test_noisy_circle_examples():
    c = sample_noisy_circle(50, 0.0, 1)
    np.testing.assert_allclose(np.hypot(*(c.points - 0.5).T), 0.5, atol=1e-12)
    big = sample_noisy_circle(100_000, 0.1, 2)
    np.testing.assert_allclose(big.points.mean(axis=0), 0.5, atol=0.01)
    with pytest.raises(ParameterError):
        sample_noisy_circle(0, 0.1, 1)


def test_seed_derivation():
    a = derive_rng(5, 1, 2).random(4)
    np.testing.assert_array_equal(a, derive_rng(5, 1, 2).random(4))
    assert not np.array_equal(a, derive_rng(5, 2, 1).random(4))
    assert stable_key("circle") == stable_key("circle") != stable_key("circles")


@pytest.mark.slow
def test_large_circle_exceeds_null_percentile():
    spec = InvariantSpec("max_bar_length", 1)
    null = NullModelSpec(Box.square(1), 500, 20190417)
    pool = [cloud_invariant(sample_uniform(null, i), spec) for i in range(300)]
    cut = np.quantile(pool, 0.99)
    hits = [cloud_invariant(sample_noisy_circle(500, 0.1, (31, i)), spec) > cut for i in range(100)]
    assert np.mean(hits) >= 0.8
