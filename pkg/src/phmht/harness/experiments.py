"""Simulation experiments built on the precomputed fixture pools."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DegeneratePoolError, InputError
from ..limit_checks import ScalingExperiment, clt_check, lln_curve
from ..metrics import InvariantKind
from ..mht import fdr_from_scores, fwer_from_scores, studentize_battery
from ..null_model import WindowShape, derive_rng, stable_key
from ..persistence import PersistentBettiQuery
from ..standardization import build_pool, exchangeability_report
from . import svg
from .config import ExperimentConfig
from .fixtures import FixturePool, circle_key, null_key

log = logging.getLogger(__name__)

COLUMN_NAMES = {
    InvariantKind.MAX_BAR_LENGTH: "studentized_length",
    InvariantKind.LOG_MAX_BAR_LENGTH: "studentized_log_length",
}


@dataclass
class Cloud:
    """One hypothesis in a simulated battery: a pool key for its observation,
    a pool key for its null draws, and the drawn indices."""

    obs_key: str
    null_key: str
    obs_index: int
    null_index: np.ndarray
    nonnull: bool = False


def _draw_battery_indices(rng, pool_size: int, n_nulls: int, same_pool: bool):
    if same_pool:
        idx = rng.choice(pool_size, n_nulls + 1, replace=False)
        return int(idx[0]), idx[1:]
    return int(rng.integers(pool_size)), rng.choice(pool_size, n_nulls, replace=False)


def _scores(fixtures: FixturePool, clouds: list[Cloud], dim: int, kind: InvariantKind):
    raw_x = np.array([fixtures.invariant(c.obs_key, dim, kind)[c.obs_index] for c in clouds])
    raw_y = np.vstack([fixtures.invariant(c.null_key, dim, kind)[c.null_index] for c in clouds])
    return raw_x, raw_y


def _null_keys(config: ExperimentConfig) -> list[str]:
    return [null_key(w, h, n) for w, h in config.boxes() for n in config.point_counts]


def _rate(count: int, reps: int) -> str:
    return f"{count / reps:.6f}"


@dataclass
class RateTable:
    """Rejection counts with alpha rows and invariant columns."""

    experiment: str
    procedure: str
    blocks: list[str]
    alphas: list[float]
    kinds: list[InvariantKind]
    reps: int
    seed_root: int
    counts: dict = field(default_factory=dict)

    def add(self, block: str, alpha: float, kind: InvariantKind, hit: bool) -> None:
        key = (block, alpha, kind)
        self.counts[key] = self.counts.get(key, 0) + int(hit)

    def rate(self, block: str, alpha: float, kind: InvariantKind | str) -> float:
        return self.counts.get((block, alpha, InvariantKind(kind)), 0) / self.reps

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "procedure", "block", "alpha"]
                   + [COLUMN_NAMES[k] for k in self.kinds] + ["reps", "seed_root"])
        for block in self.blocks:
            for a in self.alphas:
                w.writerow([self.experiment, self.procedure, block, f"{a:g}"]
                           + [_rate(self.counts.get((block, a, k), 0), self.reps) for k in self.kinds]
                           + [self.reps, self.seed_root])
        return buf.getvalue()


def _run_rep(fixtures, clouds, config, kinds, tables, block, extra=None):
    for kind in kinds:
        raw_x, raw_y = _scores(fixtures, clouds, config.homology_dim, kind)
        x, y = studentize_battery(raw_x, raw_y, [c.obs_key for c in clouds])
        p, arg, _, _ = fwer_from_scores(x, y)
        for a in config.alphas:
            tables["fwer"].add(block, a, kind, p <= a)
            reject, *_ = fdr_from_scores(x, y, a)
            tables["fdr"].add(block, a, kind, bool(reject.any()))
            if extra is not None:
                extra.add(block, a, kind, p <= a and clouds[arg].nonnull)


def run_level_experiment(config: ExperimentConfig, fixtures: FixturePool) -> dict[str, RateTable]:
    """Null rejection rates: batteries of K pure-null clouds."""
    kinds = [InvariantKind(k) for k in config.invariants]
    keys = _null_keys(config)
    for k in keys:
        fixtures.raw(k, config.homology_dim)
    tables = {p: RateTable("level", p, ["null"], list(config.alphas), kinds, config.reps,
                           config.seed_root) for p in ("fwer", "fdr")}
    lo, hi = config.level_k_range
    for rep in range(config.reps):
        rng = derive_rng(config.seed_root, stable_key("level"), rep)
        K = int(rng.integers(lo, hi + 1))
        clouds = []
        for _ in range(K):
            key = keys[int(rng.integers(len(keys)))]
            oi, ni = _draw_battery_indices(rng, config.pool_size, config.N - 1, True)
            clouds.append(Cloud(key, key, oi, ni))
        _run_rep(fixtures, clouds, config, kinds, tables, "null")
    return tables


def run_power_experiment(config: ExperimentConfig, fixtures: FixturePool) -> dict[str, RateTable]:
    """Power: one planted noisy circle among null clouds.

    The circle's null draws come from the unit-box pool with the same point
    count.  ``argmax`` counts reps where the test rejects and the maximal
    score belongs to the planted circle.
    """
    kinds = [InvariantKind(k) for k in config.invariants]
    keys = _null_keys(config)
    blocks = [f"sigma={s:g}" for s in config.noise_sigmas]
    tables = {p: RateTable("power", p, blocks, list(config.alphas), kinds, config.reps,
                           config.seed_root) for p in ("fwer", "fdr")}
    argmax = RateTable("power", "fwer_argmax_is_circle", blocks, list(config.alphas), kinds,
                       config.reps, config.seed_root)
    lo, hi = config.power_null_range
    for sigma, block in zip(config.noise_sigmas, blocks):
        for rep in range(config.reps):
            rng = derive_rng(config.seed_root, stable_key("power"), stable_key(block), rep)
            n = int(config.point_counts[int(rng.integers(len(config.point_counts)))])
            oi, ni = _draw_battery_indices(rng, config.pool_size, config.N - 1, False)
            clouds = [Cloud(circle_key(sigma, n), null_key(1.0, 1.0, n), oi, ni, True)]
            for _ in range(int(rng.integers(lo, hi + 1))):
                key = keys[int(rng.integers(len(keys)))]
                oi, ni = _draw_battery_indices(rng, config.pool_size, config.N - 1, True)
                clouds.append(Cloud(key, key, oi, ni))
            _run_rep(fixtures, clouds, config, kinds, tables, block, argmax)
    tables["fwer_argmax"] = argmax
    return tables


def run_fdr_experiment(config: ExperimentConfig, fixtures: FixturePool) -> list[dict]:
    """Mixed batteries with known truth: empirical FDR and true positives."""
    s = config.fdr
    kinds = [InvariantKind(k) for k in config.invariants]
    keys = _null_keys(config)
    rows = []
    for kind in kinds:
        fdp, tp, rej = [], [], []
        for rep in range(s.reps):
            rng = derive_rng(config.seed_root, stable_key("fdr"), rep)
            clouds = []
            for _ in range(s.n_circles):
                n = int(s.circle_counts[int(rng.integers(len(s.circle_counts)))])
                oi, ni = _draw_battery_indices(rng, config.pool_size, config.N - 1, False)
                clouds.append(Cloud(circle_key(s.sigma, n), null_key(1.0, 1.0, n), oi, ni, True))
            for _ in range(s.n_nulls):
                key = keys[int(rng.integers(len(keys)))]
                oi, ni = _draw_battery_indices(rng, config.pool_size, config.N - 1, True)
                clouds.append(Cloud(key, key, oi, ni))
            raw_x, raw_y = _scores(fixtures, clouds, config.homology_dim, kind)
            x, y = studentize_battery(raw_x, raw_y)
            reject, *_ = fdr_from_scores(x, y, s.alpha)
            truth = np.array([c.nonnull for c in clouds])
            V, S = int((reject & ~truth).sum()), int((reject & truth).sum())
            R = V + S
            fdp.append(V / max(R, 1))
            tp.append(S)
            rej.append(R)
        rows.append({
            "invariant": COLUMN_NAMES[kind], "alpha": s.alpha, "reps": s.reps,
            "mean_fdp": float(np.mean(fdp)), "mean_true_positives": float(np.mean(tp)),
            "mean_rejections": float(np.mean(rej)), "seed_root": config.seed_root,
        })
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


PANELS = [(0, InvariantKind.MAX_BAR_LENGTH), (1, InvariantKind.MAX_BAR_LENGTH),
          (0, InvariantKind.LOG_MAX_BAR_LENGTH), (1, InvariantKind.LOG_MAX_BAR_LENGTH)]


def _panel_name(dim: int, kind: InvariantKind) -> str:
    return f"H{dim}_{COLUMN_NAMES[kind]}"


def run_exchangeability(config: ExperimentConfig, fixtures: FixturePool,
                        out_dir: str | Path | None = None) -> dict:
    """Studentize every null pool against itself and compare them pairwise.

    Returns a summary per panel (H0/H1 x length/log-length).  With
    ``out_dir``, writes a KS-matrix CSV per panel, a JSON file with ECDF
    curves and sampled QQ pairs, and an SVG figure of each.
    """
    keys = _null_keys(config)
    summary = {}
    figure = {"ecdf": {}, "qq": {}}
    for dim, kind in PANELS:
        name = _panel_name(dim, kind)
        pools = []
        for k in keys:
            try:
                pools.append(build_pool(fixtures.invariant(k, dim, kind), k))
            except DegeneratePoolError as exc:
                log.warning("exchangeability: %s", exc)
        rep = exchangeability_report(pools)
        ks = np.array([p["ks"] for p in rep["pairs"]])
        qq = np.array([p["qq_correlation"] for p in rep["pairs"]])
        summary[name] = {
            "pools": len(rep["keys"]),
            "excluded": rep["excluded"],
            "pairs": int(ks.size),
            "fraction_ks_le_0.09": float(np.mean(ks <= 0.09)) if ks.size else float("nan"),
            "max_ks": float(ks.max()) if ks.size else float("nan"),
            "min_qq_correlation": float(np.nanmin(qq)) if qq.size else float("nan"),
            "worst_ks_pair": [rep["pairs"][int(ks.argmax())][c] for c in "ab"] if ks.size else [],
        }
        rng = derive_rng(config.seed_root, stable_key("qq-sample"), dim, len(name))
        pick = rng.choice(len(rep["pairs"]), min(config.qq_pairs, len(rep["pairs"])), replace=False)
        figure["qq"][name] = [rep["pairs"][int(i)] for i in sorted(pick)]
        grid = np.linspace(-3, 5, 81)
        figure["ecdf"][name] = {
            "grid": grid.tolist(),
            "curves": {
                p.config_key: (np.searchsorted(np.sort((p.values - p.mean) / p.sd), grid, side="right")
                               / len(p)).tolist()
                for p in pools
            },
        }
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key"] + rep["keys"])
            for k, row in zip(rep["keys"], rep["ks_matrix"]):
                w.writerow([k] + [f"{v:.6f}" for v in row])
            (out / f"exchangeability_ks_{name}.csv").write_text(buf.getvalue())
    if out_dir is not None:
        out = Path(out_dir)
        (out / "exchangeability.json").write_text(json.dumps({"summary": summary, **figure},
                                                              indent=1, sort_keys=True))
        (out / "exchangeability_ecdf.svg").write_text(svg.ecdf_panels(figure["ecdf"]))
        (out / "exchangeability_qq.svg").write_text(svg.qq_grid(figure["qq"]))
    return summary


def run_limits(config: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """LLN curves for a box and an equal-area disk, plus a CLT normality check."""
    s = config.limits
    q = PersistentBettiQuery(int(s.query[0]), float(s.query[1]), float(s.query[2]))
    shapes = {
        "box": WindowShape("box", (1.0, 1.0)),
        "disk": WindowShape("disk", (1.0 / np.sqrt(np.pi),)),
    }
    curves = {}
    for name, shape in shapes.items():
        exp = ScalingExperiment(shape, tuple(s.scales), q, s.intensity, s.reps,
                                seed=config.seed_root + stable_key(name) % 1000)
        curves[name] = lln_curve(exp)
    clt_exp = ScalingExperiment(shapes["box"], tuple(s.scales), q, s.intensity, s.clt_reps,
                                seed=config.seed_root + 1)
    clt = clt_check(clt_exp, s.clt_scale)
    box = [r.mean for r in curves["box"]]
    rel_first = abs(box[1] - box[0]) / abs(box[1]) if box[1] else float("inf")
    rel_last = abs(box[-1] - box[-2]) / abs(box[-1]) if box[-1] else float("inf")
    disk_last = curves["disk"][-1].mean
    result = {
        "query": {"q": q.q, "r": q.r, "s": q.s},
        "lln": {name: [r.row() for r in recs] for name, recs in curves.items()},
        "relative_change_first": rel_first,
        "relative_change_last": rel_last,
        "box_disk_relative_gap": abs(box[-1] - disk_last) / abs(box[-1]) if box[-1] else float("inf"),
        "clt": clt,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = [dict(shape=name, **r.row()) for name, recs in curves.items() for r in recs]
        (out / "limits_lln.csv").write_text(rows_to_csv(rows))
        (out / "limits_report.json").write_text(json.dumps(result, indent=2, sort_keys=True))
    return result


def write_tables(tables: dict[str, RateTable], out_dir: str | Path, stem: str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, t in tables.items():
        p = out / f"{stem}_{name}.csv"
        p.write_text(t.to_csv())
        paths.append(p)
    return paths


def require_keys(fixtures: FixturePool, keys: list[str]) -> None:
    for k in keys:
        if k not in fixtures.values:
            raise InputError(f"missing fixture key {k!r}")
