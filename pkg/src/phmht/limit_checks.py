"""Empirical checks of the scaling limits of persistent Betti numbers.

For a homogeneous Poisson process in ``scale * L`` the persistent Betti
number divided by the window area should settle to a shape-independent
constant, and its fluctuations should be asymptotically normal.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from .complexes import PointCloud, alpha_filtration_2d
from .errors import ParameterError
from .null_model import WindowShape, sample_poisson_window
from .persistence import PersistenceDiagram, PersistentBettiQuery, persistent_betti, reduce

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_QUERIES",
    "PEAK_QUERY",
    "ScalingExperiment",
    "ScaleRecord",
    "window_betti",
    "sample_betti",
    "lln_curve",
    "normality_report",
    "clt_check",
]

# (r, s) in circumradius units for unit-intensity planar processes; the H1
# Betti curve of the alpha filtration peaks near t = 0.8
DEFAULT_QUERIES = ((0.7, 0.7), (0.8, 0.8), (0.75, 0.85))
PEAK_QUERY = PersistentBettiQuery(1, 0.8, 0.8)


@dataclass(frozen=True)
class ScalingExperiment:
    shape: WindowShape
    scales: tuple[float, ...]
    query: PersistentBettiQuery
    intensity: float = 1.0
    reps: int = 100
    seed: int = 0
    max_points: int = 20000

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if len(self.scales) < 3 or any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ParameterError("need at least three increasing scales")
        if self.reps < 30:
            raise ParameterError("need at least 30 replicates per scale")
        if not self.intensity > 0:
            raise ParameterError("intensity must be > 0")


@dataclass
class ScaleRecord:
    scale: float
    volume: float
    reps: int
    mean: float
    sd: float
    betti: np.ndarray = field(repr=False)

    def row(self) -> dict:
        return {"scale": self.scale, "volume": self.volume, "reps": self.reps,
                "mean": self.mean, "sd": self.sd}


def window_betti(points: np.ndarray, query: PersistentBettiQuery) -> int:
    if points.shape[0] == 0:
        return 0
    diagram: PersistenceDiagram = reduce(alpha_filtration_2d(PointCloud(points)))
    return persistent_betti(diagram, query)


def sample_betti(exp: ScalingExperiment, scale: float, reps: int | None = None) -> np.ndarray:
    """Persistent Betti numbers of ``reps`` Poisson draws at one scale."""
    shape = replace(exp.shape, scale=scale)
    scale_key = int(round(scale * 1000))
    out = np.empty(reps or exp.reps, dtype=np.int64)
    for rep in range(out.size):
        pts = sample_poisson_window(shape, exp.intensity, (exp.seed, scale_key, rep))
        out[rep] = window_betti(pts, exp.query)
    return out


def lln_curve(exp: ScalingExperiment) -> list[ScaleRecord]:
    """Mean and sd of beta / Vol at every scale.

    Scales whose expected point count exceeds ``max_points`` are dropped
    with a warning.
    """
    records = []
    for scale in exp.scales:
        shape = replace(exp.shape, scale=scale)
        if exp.intensity * shape.volume > exp.max_points:
            log.warning("scale %g exceeds the %d point guard; truncating", scale, exp.max_points)
            break
        betti = sample_betti(exp, scale)
        normed = betti / shape.volume
        records.append(ScaleRecord(scale, shape.volume, betti.size, float(normed.mean()),
                                   float(normed.std(ddof=1)), betti))
    return records


def normality_report(values: Sequence[float]) -> dict:
    """QQ correlation against standard normal quantiles plus moments."""
    v = np.asarray(values, float)
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    if v.size < 3 or not sd > 0:
        return {"n": int(v.size), "degenerate": True, "qq_correlation": math.nan,
                "skew": math.nan, "excess_kurtosis": math.nan}
    z = np.sort((v - v.mean()) / sd)
    probs = (np.arange(1, v.size + 1) - 0.5) / v.size
    theo = stats.norm.ppf(probs)
    return {
        "n": int(v.size),
        "degenerate": False,
        "qq_correlation": float(np.corrcoef(theo, z)[0, 1]),
        "skew": float(stats.skew(v)),
        "excess_kurtosis": float(stats.kurtosis(v)),
    }


def clt_check(exp: ScalingExperiment, scale: float | None = None) -> dict:
    """Normality report for centred, scaled beta at ``scale`` (default: largest)."""
    scale = exp.scales[-1] if scale is None else float(scale)
    if exp.reps < 100:
        raise ParameterError("CLT check needs at least 100 replicates")
    betti = sample_betti(exp, scale)
    report = normality_report(betti)
    report.update(scale=scale, q=exp.query.q, r=exp.query.r, s=exp.query.s,
                  mean=float(betti.mean()))
    return report
