"""Precomputed invariant pools.

Each key stores a (pool_size, 2) float64 array of the longest finite H0 and
H1 bar of independently simulated clouds, written as a raw ``.npy`` file.
A JSON manifest records seed, versions, counts and completion per key.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from .._kernels import BACKEND
from ..complexes import alpha_filtration_2d
from ..errors import InputError
from ..metrics import InvariantKind, max_bar_length
from ..null_model import Box, NullModelSpec, sample_noisy_circle, sample_uniform, stable_key
from ..persistence import reduce
from .config import ExperimentConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"


def null_key(w: float, h: float, n: int) -> str:
    return f"null_w{w:g}_h{h:g}_n{n}"


def circle_key(sigma: float, n: int) -> str:
    return f"circle_s{sigma:g}_n{n}"


def fixture_keys(config: ExperimentConfig) -> dict[str, dict]:
    keys = {}
    for w, h in config.boxes():
        for n in config.point_counts:
            keys[null_key(w, h, n)] = {"kind": "null", "w": w, "h": h, "n": int(n)}
    for s in config.noise_sigmas:
        for n in config.point_counts:
            keys[circle_key(s, n)] = {"kind": "circle", "sigma": float(s), "n": int(n)}
    return keys


def _cloud_bars(cloud, squared: bool) -> tuple[float, float]:
    d = reduce(alpha_filtration_2d(cloud, squared=squared))
    return max_bar_length(d, 0), max_bar_length(d, 1)


def _compute_chunk(args) -> np.ndarray:
    key, spec, root, start, stop, squared = args
    kh = stable_key(key)
    out = np.empty((stop - start, 2))
    if spec["kind"] == "null":
        model = NullModelSpec(Box((0.0, 0.0), (spec["w"], spec["h"])), spec["n"], root)
        for row, j in enumerate(range(start, stop)):
            out[row] = _cloud_bars(sample_uniform(model, (kh, j)), squared)
    else:
        for row, j in enumerate(range(start, stop)):
            out[row] = _cloud_bars(sample_noisy_circle(spec["n"], spec["sigma"], (root, kh, j)), squared)
    return out


def compute_key(key: str, spec: dict, root: int, size: int, threads: int = 1,
                squared: bool = False) -> np.ndarray:
    if threads <= 1:
        return _compute_chunk((key, spec, root, 0, size, squared))
    bounds = np.linspace(0, size, 4 * threads + 1).astype(int)
    tasks = [(key, spec, root, int(a), int(b), squared) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return np.vstack(list(ex.map(_compute_chunk, tasks)))


@dataclass
class FixturePool:
    """Map from fixture key to its (pool_size, 2) array of H0/H1 max bars."""

    values: dict[str, np.ndarray]
    manifest: dict

    def raw(self, key: str, dim: int) -> np.ndarray:
        if key not in self.values:
            raise InputError(f"missing fixture key {key!r}")
        return self.values[key][:, dim]

    def invariant(self, key: str, dim: int, kind: str | InvariantKind) -> np.ndarray:
        """Invariant values; log of an empty dimension is NaN (absent)."""
        v = self.raw(key, dim)
        if InvariantKind(kind) is InvariantKind.MAX_BAR_LENGTH:
            return v.copy()
        with np.errstate(divide="ignore"):
            out = np.log(v)
        out[v <= 0] = math.nan
        return out

    def keys(self, kind: str | None = None) -> list[str]:
        return [k for k, s in self.manifest["keys"].items() if kind is None or s["kind"] == kind]


def _write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def precompute_fixtures(config: ExperimentConfig, out_dir: str | Path, threads: int = 1,
                        reuse: bool = True) -> FixturePool:
    """Simulate every fixture key and persist the pools.

    Keys already present with matching seed and pool size are reused.  The
    manifest is rewritten after every key, so an interrupted run leaves the
    unfinished keys marked incomplete.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mpath = out / MANIFEST
    keys = fixture_keys(config)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "seed_root": config.seed_root,
        "pool_size": config.pool_size,
        "alpha_values": config.alpha_values,
        "columns": ["h0_max_bar", "h1_max_bar"],
        "keys": {k: dict(s, complete=False, count=0) for k, s in keys.items()},
    }
    old = {}
    if reuse and mpath.exists():
        prev = json.loads(mpath.read_text())
        if all(prev.get(k) == manifest[k] for k in ("seed_root", "pool_size", "alpha_values",
                                                        "schema_version")):
            old = prev.get("keys", {})
    values = {}
    for key, spec in keys.items():
        fpath = out / f"{key}.npy"
        entry = manifest["keys"][key]
        if old.get(key, {}).get("complete") and fpath.exists():
            arr = np.load(fpath)
            if arr.shape == (config.pool_size, 2) \
                    and hashlib.sha256(arr.tobytes()).hexdigest() == old[key].get("sha256"):
                values[key] = arr
                entry.update(old[key])
                continue
        log.info("computing fixture %s (%d clouds, backend %s)", key, config.pool_size, BACKEND)
        _write_manifest(mpath, manifest)
        arr = compute_key(key, spec, config.seed_root, config.pool_size, threads,
                          config.alpha_values == "squared")
        np.save(fpath, arr)
        values[key] = arr
        entry.update(
            complete=True, count=int(arr.shape[0]), file=fpath.name,
            sha256=hashlib.sha256(arr.tobytes()).hexdigest(),
            absent={"h0": int(np.sum(arr[:, 0] <= 0)), "h1": int(np.sum(arr[:, 1] <= 0))},
        )
        _write_manifest(mpath, manifest)
    _write_manifest(mpath, manifest)
    return FixturePool(values, manifest)


def load_fixtures(out_dir: str | Path, config: ExperimentConfig | None = None) -> FixturePool:
    out = Path(out_dir)
    mpath = out / MANIFEST
    if not mpath.exists():
        raise InputError(f"no fixture manifest in {out}; run the 'fixtures' command first")
    manifest = json.loads(mpath.read_text())
    if config is not None:
        if (manifest.get("seed_root"), manifest.get("pool_size"), manifest.get("alpha_values")) \
                != (config.seed_root, config.pool_size, config.alpha_values):
            raise InputError("fixtures were built with a different seed, pool size or alpha_values")
        missing = set(fixture_keys(config)) - set(manifest["keys"])
        if missing:
            raise InputError(f"missing fixture key {sorted(missing)[0]!r}")
    values = {}
    for key, entry in manifest["keys"].items():
        if not entry.get("complete"):
            raise InputError(f"fixture key {key!r} is incomplete")
        values[key] = np.load(out / entry["file"])
    return FixturePool(values, manifest)
