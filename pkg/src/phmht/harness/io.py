"""Point-cloud file formats.

CSV: one point per row, one column per coordinate, optional header row.
JSONL: one cloud per line, ``{"label": "...", "points": [[x, y], ...]}``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..complexes import PointCloud
from ..errors import InputError


def read_point_cloud_csv(path: str | Path, label: str | None = None) -> PointCloud:
    path = Path(path)
    try:
        rows = [r for r in csv.reader(path.read_text().splitlines()) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: no points")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        pts = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric coordinate ({exc})") from exc
    if pts.ndim != 2:
        raise InputError(f"{path}: rows have differing numbers of columns")
    return PointCloud(pts, label or path.stem)


def read_point_clouds_jsonl(path: str | Path) -> list[PointCloud]:
    path = Path(path)
    clouds = []
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            clouds.append(PointCloud(np.array(obj["points"], dtype=float),
                                     obj.get("label") or f"{path.stem}:{n}"))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}:{n}: {exc}") from exc
    return clouds


def load_clouds(source: str | Path) -> list[PointCloud]:
    """Clouds from a CSV file, a JSONL file, or a directory of either."""
    source = Path(source)
    if source.is_dir():
        files = sorted(p for p in source.iterdir() if p.suffix.lower() in (".csv", ".jsonl"))
        if not files:
            raise InputError(f"{source}: no .csv or .jsonl files")
        return [c for f in files for c in load_clouds(f)]
    if not source.exists():
        raise InputError(f"{source}: no such file")
    if source.suffix.lower() == ".jsonl":
        return read_point_clouds_jsonl(source)
    return [read_point_cloud_csv(source)]


def write_point_cloud_csv(cloud: PointCloud, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(cloud.ambient_dim)])
        for row in cloud.points.tolist():
            w.writerow([repr(v) for v in row])
