"""Studentization against simulated null pools, and exchangeability checks."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import DegeneratePoolError

log = logging.getLogger(__name__)

__all__ = [
    "NullPool",
    "StandardizedScore",
    "build_pool",
    "studentize",
    "studentize_values",
    "ks_statistic",
    "qq_points",
    "exchangeability_report",
]


@dataclass(frozen=True, eq=False)
class NullPool:
    """Invariant values of null draws for one configuration.

    ``values`` holds only present statistics; draws whose statistic was
    undefined are counted in ``n_absent``.
    """

    values: np.ndarray
    config_key: Hashable
    mean: float
    sd: float
    ecdf: np.ndarray = field(repr=False)
    n_absent: int = 0

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class StandardizedScore:
    raw: float
    z: float
    ecdf_quantile: float
    config_key: Hashable = None


def build_pool(values: Sequence[float], config_key: Hashable = None, *,
               min_retained: float = 0.5) -> NullPool:
    """Pool with sample mean, sample sd (n - 1) and sorted ECDF support.

    NaN entries are treated as absent statistics and dropped.

    Raises
    ------
    DegeneratePoolError
        Fewer than two present values, all values equal, or fewer than
        ``min_retained`` of the draws present.
    """
    arr = np.asarray(values, dtype=float).reshape(-1)
    present = arr[~np.isnan(arr)]
    n_absent = int(arr.size - present.size)
    if arr.size and present.size < min_retained * arr.size:
        raise DegeneratePoolError(
            f"pool {config_key!r}: only {present.size}/{arr.size} draws have a defined statistic")
    if present.size < 2:
        raise DegeneratePoolError(f"pool {config_key!r}: needs at least two values")
    sd = float(np.std(present, ddof=1))
    if not sd > 0:
        raise DegeneratePoolError(f"pool {config_key!r}: all values are equal")
    if n_absent:
        log.info("pool %r: dropped %d absent statistics", config_key, n_absent)
    present.setflags(write=False)
    ecdf = np.sort(present)
    ecdf.setflags(write=False)
    return NullPool(present, config_key, float(np.mean(present)), sd, ecdf, n_absent)


def studentize(x: float, pool: NullPool) -> StandardizedScore:
    """z-score and right-continuous ECDF value of ``x`` against ``pool``."""
    z = (x - pool.mean) / pool.sd
    q = np.searchsorted(pool.ecdf, x, side="right") / pool.ecdf.size
    return StandardizedScore(float(x), float(z), float(q), pool.config_key)


def studentize_values(values: np.ndarray, pool: NullPool) -> np.ndarray:
    """Vectorized z-scores; NaN (absent) maps to ``-inf``."""
    z = (np.asarray(values, dtype=float) - pool.mean) / pool.sd
    return np.where(np.isnan(z), -np.inf, z)


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def qq_points(a: np.ndarray, b: np.ndarray, percentiles=range(1, 100)) -> np.ndarray:
    pct = np.asarray(list(percentiles), dtype=float)
    return np.column_stack([np.percentile(a, pct), np.percentile(b, pct)])


def _self_z(pool: NullPool) -> np.ndarray:
    return (pool.values - pool.mean) / pool.sd


def exchangeability_report(pools: Sequence[NullPool], *, min_size: int = 50,
                           percentiles=range(1, 100)) -> dict:
    """Pairwise comparison of self-studentized pools.

    Returns a JSON-ready dict with the pool keys used, the excluded keys,
    the KS matrix, and for every pair the QQ points and their correlation.
    """
    used, excluded = [], []
    for p in pools:
        if len(p) < min_size:
            log.warning("pool %r has %d values (< %d); excluded", p.config_key, len(p), min_size)
            excluded.append(p)
        else:
            used.append(p)
    k = len(used)
    zs = [_self_z(p) for p in used]
    ks = np.zeros((k, k))
    pairs = []
    for i, j in itertools.combinations(range(k), 2):
        ks[i, j] = ks[j, i] = ks_statistic(zs[i], zs[j])
        qq = qq_points(zs[i], zs[j], percentiles)
        corr = float(np.corrcoef(qq[:, 0], qq[:, 1])[0, 1]) if np.ptp(qq[:, 0]) and np.ptp(qq[:, 1]) else math.nan
        pairs.append({
            "a": str(used[i].config_key),
            "b": str(used[j].config_key),
            "ks": ks[i, j],
            "qq_correlation": corr,
            "qq": qq.tolist(),
        })
    return {
        "keys": [str(p.config_key) for p in used],
        "excluded": [str(p.config_key) for p in excluded],
        "ks_matrix": ks.tolist(),
        "pairs": pairs,
    }
