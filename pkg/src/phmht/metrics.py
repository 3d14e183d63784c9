"""Diagram invariants and diagram distances.

All distances use the L-infinity ground metric, and a point is matched to
the diagonal at cost ``(death - birth) / 2``.  Points at infinity can only be
matched to points at infinity; they are paired in sorted birth order, which
is optimal for every cost considered here.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ParameterError, UndefinedStatisticError
from .persistence import PersistenceDiagram

__all__ = [
    "InvariantKind",
    "InvariantSpec",
    "MatchingCost",
    "max_bar_length",
    "log_max_bar_length",
    "evaluate_invariant",
    "bottleneck_distance",
    "wasserstein_distance",
    "distance_matrix",
    "rt_loss",
    "rt_loss_from_matrix",
]


class InvariantKind(str, enum.Enum):
    MAX_BAR_LENGTH = "max_bar_length"
    LOG_MAX_BAR_LENGTH = "log_max_bar_length"


@dataclass(frozen=True)
class InvariantSpec:
    kind: InvariantKind = InvariantKind.MAX_BAR_LENGTH
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", InvariantKind(self.kind))
        if self.dim < 0:
            raise ParameterError("invariant dimension must be >= 0")


@dataclass(frozen=True)
class MatchingCost:
    """Matching exponent ``p`` (``inf`` for bottleneck) and loss exponent ``q_exp``."""

    p: float = 2.0
    q_exp: float = 1.0

    def __post_init__(self):
        if not (self.p >= 1):
            raise ParameterError("p must be >= 1 or inf")
        if not (self.q_exp >= 1):
            raise ParameterError("q_exp must be >= 1")


def _finite_lengths(diagram: PersistenceDiagram, dim: int) -> np.ndarray:
    mask = (diagram.dims == dim) & np.isfinite(diagram.deaths)
    return diagram.deaths[mask] - diagram.births[mask]


def max_bar_length(diagram: PersistenceDiagram, dim: int) -> float:
    """Longest finite bar in ``dim``; 0.0 when there is none."""
    lengths = _finite_lengths(diagram, dim)
    return float(lengths.max()) if lengths.size else 0.0


def log_max_bar_length(diagram: PersistenceDiagram, dim: int) -> float:
    """Natural log of :func:`max_bar_length`.

    Raises
    ------
    UndefinedStatisticError
        If ``dim`` has no finite bar of positive length.
    """
    m = max_bar_length(diagram, dim)
    if m <= 0:
        raise UndefinedStatisticError(f"no finite bar of positive length in dimension {dim}")
    return math.log(m)


def evaluate_invariant(diagram: PersistenceDiagram, spec: InvariantSpec) -> float:
    """Invariant value, or NaN when it is undefined (an absent statistic)."""
    if spec.kind is InvariantKind.MAX_BAR_LENGTH:
        return max_bar_length(diagram, spec.dim)
    try:
        return log_max_bar_length(diagram, spec.dim)
    except UndefinedStatisticError:
        return math.nan


def _split(diagram: PersistenceDiagram, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal finite points (k, 2) and sorted births of infinite points."""
    mask = diagram.dims == dim
    b, d = diagram.births[mask], diagram.deaths[mask]
    inf = ~np.isfinite(d)
    fin = (~inf) & (d > b)
    return np.column_stack([b[fin], d[fin]]), np.sort(b[inf])


def _essential_costs(e1: np.ndarray, e2: np.ndarray) -> np.ndarray | None:
    if e1.size != e2.size:
        return None
    return np.abs(e1 - e2)


def _augmented_cost(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(n+m) x (n+m) L-infinity cost matrix with diagonal slots.

    Rows: the n points of x, then m diagonal copies (one per point of y).
    Columns: the m points of y, then n diagonal copies (one per point of x).
    Forbidden pairings carry ``inf``.
    """
    n, m = x.shape[0], y.shape[0]
    c = np.full((n + m, m + n), np.inf)
    if n and m:
        c[:n, :m] = np.maximum(np.abs(x[:, None, 0] - y[None, :, 0]),
                               np.abs(x[:, None, 1] - y[None, :, 1]))
    if n:
        c[np.arange(n), m + np.arange(n)] = (x[:, 1] - x[:, 0]) / 2.0
    if m:
        c[n + np.arange(m), np.arange(m)] = (y[:, 1] - y[:, 0]) / 2.0
    c[n:, m:] = 0.0
    return c


def _perfect_matching_exists(allowed: np.ndarray) -> bool:
    graph = csr_matrix(allowed.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, dim: int) -> float:
    """Exact bottleneck distance in one homological dimension.

    Binary search over the candidate costs with a Hopcroft-Karp feasibility
    check.  Returns ``inf`` if the numbers of infinite points differ.
    """
    x, e1 = _split(d1, dim)
    y, e2 = _split(d2, dim)
    ess = _essential_costs(e1, e2)
    if ess is None:
        return math.inf
    ess_max = float(ess.max()) if ess.size else 0.0
    if x.shape[0] + y.shape[0] == 0:
        return ess_max
    cost = _augmented_cost(x, y)
    candidates = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(cost <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(float(candidates[lo]), ess_max)


def wasserstein_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, dim: int,
                         cost: MatchingCost | float = 2.0) -> float:
    """p-Wasserstein distance in one dimension (Hungarian assignment)."""
    p = cost.p if isinstance(cost, MatchingCost) else float(cost)
    if math.isinf(p):
        return bottleneck_distance(d1, d2, dim)
    if p < 1:
        raise ParameterError("p must be >= 1")
    x, e1 = _split(d1, dim)
    y, e2 = _split(d2, dim)
    ess = _essential_costs(e1, e2)
    if ess is None:
        return math.inf
    total = float(np.sum(ess ** p))
    if x.shape[0] + y.shape[0]:
        c = _augmented_cost(x, y)
        big = np.isinf(c)
        cp = np.where(big, 0.0, c) ** p
        cp[big] = (cp.max() + 1.0) * (c.shape[0] + 1)
        rows, cols = linear_sum_assignment(cp)
        total += float(cp[rows, cols].sum())
    return total ** (1.0 / p)


def distance_matrix(diagrams: Sequence[PersistenceDiagram], dim: int,
                    cost: MatchingCost | float = 2.0) -> np.ndarray:
    """Symmetric matrix of pairwise Wasserstein (or bottleneck) distances."""
    k = len(diagrams)
    dm = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            dm[i, j] = dm[j, i] = wasserstein_distance(diagrams[i], diagrams[j], dim, cost)
    return dm


def rt_loss_from_matrix(dm: np.ndarray, labels: np.ndarray, q_exp: float = 1.0) -> float:
    """In-group loss for a 0/1 labelling of the diagrams behind ``dm``."""
    labels = np.asarray(labels, dtype=bool)
    total = 0.0
    for mask in (~labels, labels):
        k = int(mask.sum())
        if k < 2:
            raise ParameterError("each group needs at least two diagrams")
        block = dm[np.ix_(mask, mask)] ** q_exp
        total += block.sum() / (2.0 * k * (k - 1))
    return float(total)


def rt_loss(group1: Sequence[PersistenceDiagram], group2: Sequence[PersistenceDiagram],
            dim: int, cost: MatchingCost = MatchingCost()) -> float:
    """Sum of mean in-group distances (raised to ``q_exp``) over both groups.

    Each group contributes ``sum_{i != j} d_p(D_i, D_j)^q / (2 k (k - 1))``.
    """
    if len(group1) < 2 or len(group2) < 2:
        raise ParameterError("each group needs at least two diagrams")
    diagrams = list(group1) + list(group2)
    dm = distance_matrix(diagrams, dim, cost.p)
    labels = np.r_[np.zeros(len(group1), bool), np.ones(len(group2), bool)]
    return rt_loss_from_matrix(dm, labels, cost.q_exp)
