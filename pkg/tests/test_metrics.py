import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phmht.errors import ParameterError, UndefinedStatisticError
from phmht.metrics import (
    InvariantKind,
    InvariantSpec,
    MatchingCost,
    bottleneck_distance,
    distance_matrix,
    evaluate_invariant,
    log_max_bar_length,
    max_bar_length,
    rt_loss,
    rt_loss_from_matrix,
    wasserstein_distance,
)
from phmht.persistence import PersistenceDiagram

from _oracles import brute_matching as brute

E = PersistenceDiagram.from_points([])


def D(*pts, dim=1):
    return PersistenceDiagram.from_points([(b, d, dim) for b, d in pts])


bars = st.lists(st.tuples(st.floats(0, 5), st.floats(0.01, 3)).map(lambda t: (t[0], t[0] + t[1])),
                max_size=4)


def test_max_bar_length_examples():
    assert max_bar_length(D((1, math.sqrt(2))), 1) == pytest.approx(math.sqrt(2) - 1)
    assert max_bar_length(E, 1) == 0.0
    assert max_bar_length(D((0, 2), (0, 5), (0, math.inf), dim=0), 0) == 5


def test_log_max_bar_length_examples():
    assert log_max_bar_length(D((0, math.e), dim=0), 0) == pytest.approx(1.0)
    assert log_max_bar_length(D((1, math.sqrt(2))), 1) == pytest.approx(-0.8814, abs=1e-4)
    with pytest.raises(UndefinedStatisticError):
        log_max_bar_length(E, 1)
    assert math.isnan(evaluate_invariant(E, InvariantSpec(InvariantKind.LOG_MAX_BAR_LENGTH, 1)))


def test_distance_examples():
    a = D((0, 2))
    assert bottleneck_distance(a, a, 1) == 0
    assert bottleneck_distance(a, E, 1) == 1
    assert bottleneck_distance(a, D((0.5, 2.5)), 1) == pytest.approx(0.5)
    assert wasserstein_distance(a, a, 1) == 0
    assert wasserstein_distance(a, E, 1, MatchingCost(p=2)) == pytest.approx(1)
    assert wasserstein_distance(D((0, 2), (0, 4)), a, 1, MatchingCost(p=1)) == pytest.approx(2)


def test_infinite_points():
    a = D((0, math.inf), dim=0)
    assert math.isinf(bottleneck_distance(a, E, 0))
    assert math.isinf(wasserstein_distance(a, E, 0))
    assert bottleneck_distance(a, D((0.25, math.inf), dim=0), 0) == pytest.approx(0.25)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        MatchingCost(p=0.5)
    with pytest.raises(ParameterError):
        MatchingCost(q_exp=0)
    with pytest.raises(ParameterError):
        rt_loss([E], [E, E], 1)


def test_rt_loss_examples():
    twin = [D((0, 2)), D((0, 2))]
    assert rt_loss(twin, twin, 1) == 0.0
    # matching (0,2) to (0,4) costs 2, sending both to the diagonal costs 1 + 2
    g1 = [D((0, 2)), D((0, 4))]
    d = brute([(0, 2)], [(0, 4)], 1)
    assert d == pytest.approx(2.0)
    cost = MatchingCost(p=1, q_exp=1)
    assert rt_loss(g1, twin, 1, cost) == pytest.approx(2 * d / 4)
    assert rt_loss(g1, twin, 1, cost) == pytest.approx(rt_loss(twin, g1, 1, cost))


@settings(max_examples=150, deadline=None)
@given(bars, bars, st.sampled_from([1.0, 2.0, math.inf]))
def test_distances_match_brute_force(x, y, p):
    got = wasserstein_distance(D(*x), D(*y), 1, MatchingCost(p=p))
    assert got == pytest.approx(brute(x, y, p), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(bars, bars, bars, st.sampled_from([1.0, 2.0, math.inf]))
def test_metric_axioms(x, y, z, p):
    c = MatchingCost(p=p)
    dxy = wasserstein_distance(D(*x), D(*y), 1, c)
    assert dxy == pytest.approx(wasserstein_distance(D(*y), D(*x), 1, c), abs=1e-12)
    assert wasserstein_distance(D(*x), D(*x), 1, c) == pytest.approx(0, abs=1e-12)
    dxz = wasserstein_distance(D(*x), D(*z), 1, c)
    dzy = wasserstein_distance(D(*z), D(*y), 1, c)
    assert dxy <= dxz + dzy + 1e-9


@settings(max_examples=100, deadline=None)
@given(bars)
def test_max_bar_is_twice_bottleneck_to_empty(x):
    d = D(*x)
    assert max_bar_length(d, 1) == pytest.approx(2 * bottleneck_distance(d, E, 1), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(bars, min_size=2, max_size=3), st.lists(bars, min_size=2, max_size=3), st.randoms())
def test_rt_loss_invariant_under_within_group_permutation(g1, g2, rnd):
    g1 = [D(*x) for x in g1]
    g2 = [D(*x) for x in g2]
    base = rt_loss(g1, g2, 1)
    rnd.shuffle(g1)
    rnd.shuffle(g2)
    assert rt_loss(g1, g2, 1) == pytest.approx(base, rel=1e-12, abs=1e-12)


def test_rt_loss_from_matrix_agrees():
    rng = np.random.default_rng(1)
    ds = [D(*[(b, b + l) for b, l in rng.uniform(0.1, 1, size=(3, 2))]) for _ in range(6)]
    dm = distance_matrix(ds, 1, 2.0)
    labels = np.array([0, 0, 0, 1, 1, 1])
    assert rt_loss_from_matrix(dm, labels, 1.0) == pytest.approx(rt_loss(ds[:3], ds[3:], 1))
