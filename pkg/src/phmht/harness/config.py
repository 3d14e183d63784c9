"""Experiment configuration (a single JSON document)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from ..errors import InputError

DEFAULT_CONFIG = "default.json"
ALPHA_VALUES = ("radius", "squared")


@dataclass
class FDRSettings:
    alpha: float = 0.1
    n_nulls: int = 20
    n_circles: int = 3
    circle_counts: list[int] = field(default_factory=lambda: [100, 500])
    sigma: float = 0.1
    reps: int = 200


@dataclass
class LimitSettings:
    intensity: float = 1.0
    scales: list[float] = field(default_factory=lambda: [2, 4, 8, 16])
    reps: int = 200
    query: list[float] = field(default_factory=lambda: [1, 0.8, 0.8])
    clt_scale: float = 8
    clt_reps: int = 200


@dataclass
class ExperimentConfig:
    box_sides: list[float] = field(default_factory=lambda: [0.1, 1, 10])
    rectangular_boxes: bool = False
    point_counts: list[int] = field(default_factory=lambda: [10, 50, 100, 500])
    noise_sigmas: list[float] = field(default_factory=lambda: [0.1, 0.25])
    N: int = 100
    level_k_range: list[int] = field(default_factory=lambda: [2, 50])
    power_null_range: list[int] = field(default_factory=lambda: [1, 49])
    batch_count: int | None = None
    reps: int = 200
    alphas: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.10])
    invariants: list[str] = field(default_factory=lambda: ["max_bar_length", "log_max_bar_length"])
    homology_dim: int = 1
    alpha_values: str = "squared"
    seed_root: int = 20190417
    pool_size: int = 1000
    qq_pairs: int = 10
    fdr: FDRSettings = field(default_factory=FDRSettings)
    limits: LimitSettings = field(default_factory=LimitSettings)

    def __post_init__(self):
        if isinstance(self.fdr, dict):
            self.fdr = FDRSettings(**self.fdr)
        if isinstance(self.limits, dict):
            self.limits = LimitSettings(**self.limits)
        for name in ("box_sides", "point_counts", "noise_sigmas", "alphas", "invariants"):
            if not getattr(self, name):
                raise InputError(f"config field {name!r} must be non-empty")
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        if self.N < 2:
            raise InputError("N must be >= 2")
        if self.pool_size < self.N:
            raise InputError("pool_size must be at least N")
        lo, hi = self.level_k_range
        if not 1 <= lo <= hi:
            raise InputError("level_k_range must satisfy 1 <= lo <= hi")
        if self.alpha_values not in ALPHA_VALUES:
            raise InputError(f"alpha_values must be one of {ALPHA_VALUES}")
        if 1 not in self.box_sides and 1.0 not in self.box_sides:
            raise InputError("box_sides must include 1 (circles are matched to the unit box)")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ExperimentConfig":
        """Read a config file; missing fields take the shipped defaults."""
        base = json.loads(resources.files(__package__).joinpath("configs", DEFAULT_CONFIG).read_text())
        if path is not None:
            try:
                base.update(json.loads(Path(path).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(base)

    def to_dict(self) -> dict:
        return asdict(self)

    def boxes(self) -> list[tuple[float, float]]:
        sides = [float(s) for s in self.box_sides]
        if self.rectangular_boxes:
            return [(w, h) for w in sides for h in sides]
        return [(s, s) for s in sides]
