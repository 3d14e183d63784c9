"""Null-model estimation and samplers.

Every sampler takes explicit seed material and derives its generator with
:func:`derive_rng`, so replicate ``j`` of cloud ``i`` is a pure function of
``(root, i, j)`` regardless of evaluation order or thread count.
"""
from __future__ import annotations

import enum
import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import PointCloud
from .errors import InputError, ParameterError

log = logging.getLogger(__name__)

__all__ = [
    "Box",
    "NullModelSpec",
    "WindowKind",
    "WindowShape",
    "derive_rng",
    "stable_key",
    "estimate_box",
    "sample_uniform",
    "sample_poisson_window",
    "sample_noisy_circle",
]


def stable_key(text: str) -> int:
    """64-bit integer derived from a string, stable across processes."""
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def derive_rng(root: int, *keys: int) -> np.random.Generator:
    """Independent generator for the task addressed by ``keys``."""
    ss = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ParameterError("box bounds must have equal, positive length")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ParameterError("box bounds must be finite")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ParameterError("box needs lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def square(cls, side: float, dim: int = 2) -> "Box":
        return cls((0.0,) * dim, (float(side),) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_json(cls, obj: dict) -> "Box":
        return cls(tuple(obj["lower"]), tuple(obj["upper"]))


@dataclass(frozen=True)
class NullModelSpec:
    box: Box
    n: int
    seed_root: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("null model needs n >= 1")

    def to_json(self) -> dict:
        return {"box": self.box.to_json(), "n": self.n, "seed_root": self.seed_root}

    @classmethod
    def from_json(cls, obj: dict) -> "NullModelSpec":
        return cls(Box.from_json(obj["box"]), int(obj["n"]), int(obj.get("seed_root", 0)))


class WindowKind(str, enum.Enum):
    BOX = "box"
    DISK = "disk"
    CONVEX_POLYGON = "convex_polygon"


@dataclass(frozen=True)
class WindowShape:
    """A planar convex window ``scale * L``.

    ``params`` by kind: box ``(width, height)``; disk ``(radius,)``;
    convex_polygon a flat ``(x0, y0, x1, y1, ...)`` list of counter-clockwise
    vertices.  The scale multiplies every length.
    """

    kind: WindowKind
    params: tuple[float, ...] = field(default=(1.0, 1.0))
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if not self.scale > 0:
            raise ParameterError("window scale must be > 0")
        if self.kind is WindowKind.CONVEX_POLYGON:
            if len(self.params) < 6 or len(self.params) % 2:
                raise ParameterError("polygon needs >= 3 (x, y) vertices")
            poly = self.vertices
            e = np.roll(poly, -1, axis=0) - poly
            cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
            if np.any(cross < -1e-12) and np.any(cross > 1e-12):
                raise ParameterError("polygon must be convex")
        if not self.volume > 0:
            raise ParameterError("window has zero area")

    @property
    def vertices(self) -> np.ndarray:
        poly = np.array(self.params).reshape(-1, 2) * self.scale
        if self.kind is WindowKind.CONVEX_POLYGON and _signed_area(poly) < 0:
            poly = poly[::-1]
        return poly

    @property
    def volume(self) -> float:
        s = self.scale
        if self.kind is WindowKind.BOX:
            return self.params[0] * self.params[1] * s * s
        if self.kind is WindowKind.DISK:
            return math.pi * (self.params[0] * s) ** 2
        return abs(_signed_area(self.vertices))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        s = self.scale
        if self.kind is WindowKind.BOX:
            return np.zeros(2), np.array(self.params[:2]) * s
        if self.kind is WindowKind.DISK:
            r = self.params[0] * s
            return np.array([-r, -r]), np.array([r, r])
        v = self.vertices
        return v.min(axis=0), v.max(axis=0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.kind is WindowKind.BOX:
            lo, hi = self.bounding_box()
            return np.all((pts >= lo) & (pts <= hi), axis=1)
        if self.kind is WindowKind.DISK:
            r = self.params[0] * self.scale
            return np.einsum("ij,ij->i", pts, pts) <= r * r
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = pts[:, None, :] - v[None, :, :]
        cross = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= 0, axis=1)


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def estimate_box(cloud: PointCloud) -> Box:
    """Unbiased per-coordinate support box of a uniform sample.

    For n points with coordinate range [lo, hi] the endpoints are
    ``lo - (hi - lo)/(n - 1)`` and ``hi + (hi - lo)/(n - 1)``.
    """
    pts = cloud.points
    n = pts.shape[0]
    if n < 2:
        raise InputError("estimate_box needs at least two points")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = (hi - lo) / (n - 1)
    a, b = lo - pad, hi + pad
    flat = a >= b
    if np.any(flat):
        log.warning("degenerate coordinate(s) %s inflated by machine epsilon",
                    np.flatnonzero(flat).tolist())
        eps = np.finfo(float).eps * np.maximum(1.0, np.abs(lo))
        a = np.where(flat, lo - eps, a)
        b = np.where(flat, hi + eps, b)
    return Box(tuple(a), tuple(b))


def sample_uniform(spec: NullModelSpec, replicate_index: int | Sequence[int]) -> PointCloud:
    """``spec.n`` i.i.d. uniform points in the box (binomial process).

    ``replicate_index`` may be a tuple, e.g. ``(cloud, replicate)``.
    """
    idx = replicate_index if isinstance(replicate_index, (tuple, list)) else (replicate_index,)
    rng = derive_rng(spec.seed_root, *idx)
    lo, hi = np.array(spec.box.lower), np.array(spec.box.upper)
    u = rng.random((spec.n, spec.box.dim))
    pts = np.minimum(lo + u * (hi - lo), hi)
    return PointCloud(pts)


def _uniform_in_window(shape: WindowShape, count: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = shape.bounding_box()
    if shape.kind is WindowKind.BOX:
        return lo + rng.random((count, 2)) * (hi - lo)
    out = np.empty((0, 2))
    while out.shape[0] < count:
        need = count - out.shape[0]
        cand = lo + rng.random((2 * need + 8, 2)) * (hi - lo)
        out = np.vstack([out, cand[shape.contains(cand)]])
    return out[:count]


def sample_poisson_window(shape: WindowShape, intensity: float,
                          seed: int | Sequence[int]) -> np.ndarray:
    """Homogeneous Poisson process in a convex window.

    Returns an (N, 2) array; N may be zero, which a PointCloud cannot hold.
    """
    if not intensity > 0:
        raise ParameterError("intensity must be > 0")
    keys = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    rng = derive_rng(keys[0], *keys[1:])
    count = int(rng.poisson(intensity * shape.volume))
    return _uniform_in_window(shape, count, rng)


def sample_noisy_circle(n: int, sigma: float, seed: int | Sequence[int]) -> PointCloud:
    """Uniform angles on the circle of radius 0.5 about (0.5, 0.5) plus
    isotropic Gaussian noise with standard deviation ``sigma``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if sigma < 0:
        raise ParameterError("sigma must be >= 0")
    keys = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    rng = derive_rng(keys[0], *keys[1:])
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    pts = 0.5 + 0.5 * np.column_stack([np.cos(theta), np.sin(theta)])
    pts = pts + sigma * rng.standard_normal((n, 2))
    return PointCloud(pts)
