"""Multiple-testing procedures for batteries of acyclicity tests.

The max-statistic FWER test and the simulated %V/%R FDR cutoff work on
studentized invariants: each observed cloud is compared with its own null
draws, and the standardized scores are then pooled across clouds.  The
two-sample variant replaces null draws with group-label permutations of an
in-group diagram loss.
"""
from __future__ import annotations

import enum
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .complexes import PointCloud, alpha_filtration_2d, build_distance_matrix, vietoris_rips
from .errors import DegeneratePoolError, InputError, ParameterError
from .metrics import InvariantSpec, MatchingCost, distance_matrix, evaluate_invariant, rt_loss_from_matrix
from .null_model import NullModelSpec, derive_rng, estimate_box, sample_uniform
from .persistence import PersistenceDiagram, reduce
from .standardization import build_pool, studentize_values

log = logging.getLogger(__name__)

__all__ = [
    "Procedure",
    "Battery",
    "HypothesisRecord",
    "DecisionReport",
    "PermutationScheme",
    "PermutationResult",
    "cloud_diagram",
    "cloud_invariant",
    "simulate_battery",
    "studentize_battery",
    "fwer_from_scores",
    "fdr_from_scores",
    "fwer_max_test",
    "fdr_cutoff_test",
    "two_sample_perm_test",
    "two_sample_fdr_from_losses",
    "two_sample_fdr",
    "classical_adjust",
]


class Procedure(str, enum.Enum):
    FWER_MAX = "fwer_max"
    FDR_CUTOFF = "fdr_cutoff"
    BONFERRONI = "bonferroni"
    HOLM = "holm"
    HOCHBERG = "hochberg"
    TWO_SAMPLE_FDR = "two_sample_fdr"


COMPLEX_KINDS = ("alpha", "alpha_squared", "rips")


@dataclass
class Battery:
    """K observed clouds tested against N - 1 null draws each.

    ``truth`` optionally marks which hypotheses are truly non-null (used
    only to fill the U/V/T/S counts in simulations).
    """

    clouds: Sequence[PointCloud]
    invariant: InvariantSpec = field(default_factory=InvariantSpec)
    N: int = 100
    seed_root: int = 0
    complex_kind: str = "alpha"
    rips_radius: float | None = None
    truth: Sequence[bool] | None = None

    def __post_init__(self):
        if len(self.clouds) < 1:
            raise ParameterError("a battery needs at least one cloud")
        if self.N < 2:
            raise ParameterError("N must be >= 2")
        if self.complex_kind not in COMPLEX_KINDS:
            raise ParameterError(f"complex_kind must be one of {COMPLEX_KINDS}")

    @property
    def K(self) -> int:
        return len(self.clouds)


def cloud_diagram(cloud: PointCloud, complex_kind: str = "alpha",
                  rips_radius: float | None = None, max_dim: int = 2) -> PersistenceDiagram:
    if complex_kind in ("alpha", "alpha_squared"):
        f = alpha_filtration_2d(cloud, squared=complex_kind == "alpha_squared")
    else:
        dm = build_distance_matrix(cloud)
        radius = rips_radius if rips_radius is not None else float(dm.max()) or 1.0
        f = vietoris_rips(dm, max_dim, radius)
    return reduce(f, cloud.label)


def cloud_invariant(cloud: PointCloud, spec: InvariantSpec, complex_kind: str = "alpha",
                    rips_radius: float | None = None) -> float:
    diagram = cloud_diagram(cloud, complex_kind, rips_radius, max(spec.dim + 1, 1))
    return evaluate_invariant(diagram, spec)


def _null_row(args) -> np.ndarray:
    i, model, n_sims, spec, kind, radius = args
    return np.array([
        cloud_invariant(sample_uniform(model, (i, j)), spec, kind, radius)
        for j in range(n_sims)
    ])


def simulate_battery(battery: Battery, models: Sequence[NullModelSpec] | None = None,
                     workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Raw observed invariants (K,) and null invariants (K, N - 1).

    Without explicit ``models`` every cloud gets the uniform null in its own
    estimated box with matching point count.  Absent statistics are NaN.
    """
    if models is None:
        models = [NullModelSpec(estimate_box(c), len(c), battery.seed_root) for c in battery.clouds]
    if len(models) != battery.K:
        raise ParameterError("need one null model per cloud")
    x = np.array([cloud_invariant(c, battery.invariant, battery.complex_kind, battery.rips_radius)
                  for c in battery.clouds])
    tasks = [(i, m, battery.N - 1, battery.invariant, battery.complex_kind, battery.rips_radius)
             for i, m in enumerate(models)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_null_row, tasks))
    else:
        rows = [_null_row(t) for t in tasks]
    return x, np.vstack(rows)


def studentize_battery(raw_x: np.ndarray, raw_y: np.ndarray,
                       labels: Sequence[str] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Studentize each cloud's observation and nulls against its own nulls."""
    raw_x = np.asarray(raw_x, float)
    raw_y = np.asarray(raw_y, float)
    x = np.empty_like(raw_x)
    y = np.empty_like(raw_y)
    for i in range(raw_x.size):
        name = labels[i] if labels is not None else f"cloud {i}"
        try:
            pool = build_pool(raw_y[i], name)
        except DegeneratePoolError as exc:
            raise DegeneratePoolError(f"{name}: {exc}") from exc
        x[i] = studentize_values(raw_x[i], pool)
        y[i] = studentize_values(raw_y[i], pool)
    return x, y


@dataclass
class HypothesisRecord:
    label: str
    raw: float
    z: float
    rank: int
    reject: bool
    adjusted_p: float | None = None
    truly_nonnull: bool | None = None


def _num(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class DecisionReport:
    procedure: Procedure
    alpha: float
    records: list[HypothesisRecord]
    p_value: float | None = None
    rejected_global: bool | None = None
    argmax: int | None = None
    qhat_curve: list[tuple[float, float]] | None = None
    cutoff: float | None = None
    smallest_achievable_fdr: float | None = None
    counts: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    seed_root: int | None = None

    @property
    def rejections(self) -> np.ndarray:
        return np.array([r.reject for r in self.records], dtype=bool)

    def to_dict(self) -> dict:
        out = {
            "procedure": self.procedure.value,
            "alpha": self.alpha,
            "seed_root": self.seed_root,
            "p_value": _num(self.p_value),
            "rejected_global": self.rejected_global,
            "argmax": self.argmax,
            "cutoff": _num(self.cutoff),
            "smallest_achievable_fdr": _num(self.smallest_achievable_fdr),
            "counts": self.counts,
            "notes": self.notes,
            "records": [],
        }
        for r in self.records:
            d = asdict(r)
            for k in ("raw", "z", "adjusted_p"):
                d[k] = _num(d[k])
            out["records"].append(d)
        if self.qhat_curve is not None:
            out["qhat_curve"] = [[_num(c), _num(q)] for c, q in self.qhat_curve]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _counts(reject: np.ndarray, truth: Sequence[bool] | None) -> dict:
    reject = np.asarray(reject, bool)
    out = {"m": int(reject.size), "R": int(reject.sum()), "W": int((~reject).sum())}
    if truth is not None:
        t = np.asarray(truth, bool)
        out.update(U=int((~reject & ~t).sum()), V=int((reject & ~t).sum()),
                   T=int((~reject & t).sum()), S=int((reject & t).sum()),
                   m0=int((~t).sum()), m1=int(t.sum()))
    return out


def fwer_from_scores(x: np.ndarray, y: np.ndarray) -> tuple[float, int, np.ndarray, np.ndarray]:
    """Max-statistic p-value from standardized scores.

    Parameters
    ----------
    x : (K,) observed scores
    y : (K, N - 1) null scores; column j is simulation round j

    Returns
    -------
    p : float
        ``(N - r + 1) / N`` with r the rank of max(x) among itself and the
        round maxima, ties ranked in favour of the nulls.
    argmax : int
    round_max : (N - 1,) per-round maxima
    adjusted : (K,) per-cloud max-adjusted p-values (post-hoc diagnostic)
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float).reshape(x.size, -1)
    n_total = y.shape[1] + 1
    round_max = y.max(axis=0)
    xm = float(x.max())
    p = (1 + int(np.count_nonzero(round_max >= xm))) / n_total
    ordered = np.sort(round_max)
    ge = round_max.size - np.searchsorted(ordered, x, side="left")
    adjusted = (1 + ge) / n_total
    return p, int(np.argmax(x)), round_max, adjusted


def _ranks_desc(x: np.ndarray) -> np.ndarray:
    order = np.argsort(-x, kind="stable")
    ranks = np.empty(x.size, dtype=int)
    ranks[order] = np.arange(1, x.size + 1)
    return ranks


def fdr_from_scores(x: np.ndarray, y: np.ndarray, alpha: float):
    """Simulated FDR cutoff on standardized scores (upper tail).

    Returns ``(reject, cutoff, curve, smallest_qhat)`` where ``curve`` lists
    ``(c_i, qhat(c_i))`` for the sorted observed scores.
    """
    x = np.asarray(x, float)
    yf = np.sort(np.asarray(y, float).reshape(-1))
    xs = np.sort(x)
    n_v = yf.size - np.searchsorted(yf, xs, side="left")
    n_r = x.size - np.searchsorted(xs, xs, side="left")
    qhat = (n_v / yf.size) / (n_r / x.size)
    curve = list(zip(xs.tolist(), qhat.tolist()))
    ok = np.flatnonzero(qhat <= alpha)
    if ok.size == 0:
        return np.zeros(x.size, bool), None, curve, float(qhat.min())
    cutoff = float(xs[ok[0]])
    return x >= cutoff, cutoff, curve, float(qhat.min())


def _labels(battery: Battery) -> list[str]:
    return [c.label or f"cloud{i}" for i, c in enumerate(battery.clouds)]


def _prepare(battery, models, workers, scores):
    if scores is None:
        raw_x, raw_y = simulate_battery(battery, models, workers)
    else:
        raw_x, raw_y = scores
    x, y = studentize_battery(raw_x, raw_y, _labels(battery))
    return np.asarray(raw_x, float), x, y


def fwer_max_test(battery: Battery, alpha: float = 0.05,
                  models: Sequence[NullModelSpec] | None = None, *, workers: int = 1,
                  scores: tuple[np.ndarray, np.ndarray] | None = None) -> DecisionReport:
    """Global max-statistic test controlling the family-wise error rate.

    Per-cloud ``reject`` flags use max-adjusted p-values and are reported
    as a post-hoc diagnostic; the guaranteed decision is ``rejected_global``.
    ``scores`` may supply precomputed raw ``(x, y)`` invariants.
    """
    raw_x, x, y = _prepare(battery, models, workers, scores)
    p, arg, _, adjusted = fwer_from_scores(x, y)
    reject = (adjusted <= alpha) & (p <= alpha)
    ranks = _ranks_desc(x)
    labels = _labels(battery)
    records = [HypothesisRecord(labels[i], raw_x[i], x[i], int(ranks[i]), bool(reject[i]),
                                float(adjusted[i]),
                                None if battery.truth is None else bool(battery.truth[i]))
               for i in range(x.size)]
    return DecisionReport(
        Procedure.FWER_MAX, alpha, records, p_value=p, rejected_global=p <= alpha,
        argmax=arg, counts=_counts(reject, battery.truth), seed_root=battery.seed_root,
        notes=["per-cloud rejections are a post-hoc diagnostic (max-adjusted p-values)"],
    )


def fdr_cutoff_test(battery: Battery, alpha: float = 0.1,
                    models: Sequence[NullModelSpec] | None = None, *, workers: int = 1,
                    scores: tuple[np.ndarray, np.ndarray] | None = None) -> DecisionReport:
    """Reject every cloud scoring at or above the smallest cutoff whose
    estimated FDR is at most ``alpha``."""
    raw_x, x, y = _prepare(battery, models, workers, scores)
    reject, cutoff, curve, smallest = fdr_from_scores(x, y, alpha)
    ranks = _ranks_desc(x)
    labels = _labels(battery)
    records = [HypothesisRecord(labels[i], raw_x[i], x[i], int(ranks[i]), bool(reject[i]),
                                None, None if battery.truth is None else bool(battery.truth[i]))
               for i in range(x.size)]
    notes = [] if cutoff is not None else [f"no cutoff reaches alpha; smallest achievable FDR {smallest:.4g}"]
    return DecisionReport(
        Procedure.FDR_CUTOFF, alpha, records, qhat_curve=curve, cutoff=cutoff,
        smallest_achievable_fdr=smallest, rejected_global=bool(reject.any()),
        counts=_counts(reject, battery.truth), notes=notes, seed_root=battery.seed_root,
    )


# ---------------------------------------------------------------------------
# two-sample permutation testing


@dataclass(frozen=True)
class PermutationScheme:
    count: int = 999
    seed: int = 0
    exhaustive: bool = False

    def __post_init__(self):
        if not self.exhaustive and self.count < 19:
            raise ParameterError("use at least 19 permutations")


@dataclass
class PermutationResult:
    p_value: float
    observed: float
    permuted: np.ndarray
    exhaustive: bool
    warning: str | None = None


def _tol(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return 1e-12 * max(1.0, float(np.abs(finite).max()) if finite.size else 1.0)


def two_sample_perm_test(group1: Sequence[PersistenceDiagram], group2: Sequence[PersistenceDiagram],
                         dim: int = 1, cost: MatchingCost = MatchingCost(),
                         scheme: PermutationScheme = PermutationScheme(), *,
                         seed_keys: tuple[int, ...] = ()) -> PermutationResult:
    """Lower-tail permutation test on the in-group loss.

    Random relabelings give the add-one p-value ``(1 + #{F_perm <= F}) /
    (1 + count)``; exhaustive enumeration (identity included) gives
    ``#{F_perm <= F} / C(n + m, n)``.
    """
    n, m = len(group1), len(group2)
    if n < 2 or m < 2:
        raise ParameterError("each group needs at least two diagrams")
    dm = distance_matrix(list(group1) + list(group2), dim, cost.p)
    labels = np.r_[np.zeros(n, bool), np.ones(m, bool)]
    observed = rt_loss_from_matrix(dm, labels, cost.q_exp)
    if scheme.exhaustive:
        perms = []
        for chosen in itertools.combinations(range(n + m), n):
            lab = np.ones(n + m, bool)
            lab[list(chosen)] = False
            perms.append(rt_loss_from_matrix(dm, lab, cost.q_exp))
        permuted = np.array(perms)
        tol = _tol(np.r_[permuted, observed])
        p = np.count_nonzero(permuted <= observed + tol) / permuted.size
    else:
        rng = derive_rng(scheme.seed, *seed_keys)
        permuted = np.array([rt_loss_from_matrix(dm, rng.permutation(labels), cost.q_exp)
                             for _ in range(scheme.count)])
        tol = _tol(np.r_[permuted, observed])
        p = (1 + np.count_nonzero(permuted <= observed + tol)) / (1 + scheme.count)
    warning = None
    if np.all(np.abs(permuted - observed) <= tol):
        warning = "all permuted losses equal the observed loss"
        log.warning(warning)
        p = 1.0
    return PermutationResult(float(p), float(observed), permuted, scheme.exhaustive, warning)


def two_sample_fdr_from_losses(observed: Sequence[float], permuted: Sequence[np.ndarray], q: float):
    """Lower-tail FDR cutoff over h observed losses and their permutation pools.

    The null rate at each cutoff averages the per-pool fractions, so pools of
    different sizes are weighted equally.  Returns ``(reject, cutoff, curve,
    smallest_qhat)``.
    """
    obs = np.asarray(observed, float)
    h = obs.size
    pools = [np.sort(np.asarray(p, float)) for p in permuted]
    if len(pools) != h:
        raise ParameterError("need one permutation pool per test")
    xs = np.sort(obs)
    pct_v = np.zeros(h)
    for pool in pools:
        pct_v += np.searchsorted(pool, xs, side="right") / pool.size
    pct_v /= h
    pct_r = np.searchsorted(xs, xs, side="right") / h
    qhat = pct_v / pct_r
    curve = list(zip(xs.tolist(), qhat.tolist()))
    ok = np.flatnonzero(qhat <= q)
    if ok.size == 0:
        return np.zeros(h, bool), None, curve, float(qhat.min())
    cutoff = float(xs[ok[-1]])
    return obs <= cutoff, cutoff, curve, float(qhat.min())


def _studentize_losses(observed: np.ndarray, pools: Sequence[np.ndarray]):
    zs, zpools = np.empty(observed.size), []
    for k, pool in enumerate(pools):
        pool = np.asarray(pool, float)
        sd = float(np.std(pool, ddof=1)) if pool.size > 1 else 0.0
        if not sd > 0:
            # every relabeling gives the same loss: nothing to detect
            zs[k] = 0.0
            zpools.append(np.zeros(pool.size))
            continue
        mu = float(pool.mean())
        zs[k] = (observed[k] - mu) / sd
        zpools.append((pool - mu) / sd)
    return zs, zpools


def two_sample_fdr(pairs: Sequence[tuple[Sequence[PersistenceDiagram], Sequence[PersistenceDiagram]]],
                   dim: int = 1, cost: MatchingCost = MatchingCost(),
                   scheme: PermutationScheme = PermutationScheme(), q: float = 0.1, *,
                   labels: Sequence[str] | None = None,
                   truth: Sequence[bool] | None = None,
                   studentize: bool = True) -> DecisionReport:
    """FDR-controlled decisions over h two-sample diagram comparisons.

    Losses of different pairs live on different scales, so by default each
    observed loss and its permuted losses are studentized against that
    pair's own permutation pool before pooling.  ``studentize=False`` pools
    the raw losses.
    """
    if len(pairs) < 1:
        raise ParameterError("need at least one test pair")
    results = [two_sample_perm_test(g1, g2, dim, cost, scheme, seed_keys=(k,))
               for k, (g1, g2) in enumerate(pairs)]
    obs = np.array([r.observed for r in results])
    pools = [r.permuted for r in results]
    scores = obs
    if studentize:
        scores, pools = _studentize_losses(obs, pools)
    reject, cutoff, curve, smallest = two_sample_fdr_from_losses(scores, pools, q)
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(obs.size, dtype=int)
    ranks[order] = np.arange(1, obs.size + 1)
    names = list(labels) if labels is not None else [f"pair{k}" for k in range(len(pairs))]
    z = scores if studentize else np.full(obs.size, math.nan)
    records = [HypothesisRecord(names[k], obs[k], z[k], int(ranks[k]), bool(reject[k]),
                                results[k].p_value, None if truth is None else bool(truth[k]))
               for k in range(obs.size)]
    notes = [r.warning for r in results if r.warning]
    if cutoff is None:
        notes.append(f"no cutoff reaches q; smallest achievable FDR {smallest:.4g}")
    return DecisionReport(
        Procedure.TWO_SAMPLE_FDR, q, records, qhat_curve=curve, cutoff=cutoff,
        smallest_achievable_fdr=smallest, rejected_global=bool(reject.any()),
        counts=_counts(reject, truth), notes=notes, seed_root=scheme.seed,
    )


def classical_adjust(p_values: Sequence[float], method: str | Procedure, alpha: float = 0.05) -> np.ndarray:
    """Bonferroni, Holm step-down or Hochberg step-up rejection decisions."""
    p = np.asarray(p_values, float).reshape(-1)
    if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
        raise InputError("p-values must lie in [0, 1]")
    method = Procedure(method)
    m = p.size
    reject = np.zeros(m, bool)
    if m == 0:
        return reject
    if method is Procedure.BONFERRONI:
        return p <= alpha / m
    order = np.argsort(p, kind="stable")
    thresholds = alpha / (m - np.arange(m))
    passed = p[order] <= thresholds
    if method is Procedure.HOLM:
        k = m if passed.all() else int(np.argmin(passed))
        reject[order[:k]] = True
    elif method is Procedure.HOCHBERG:
        hits = np.flatnonzero(passed)
        if hits.size:
            reject[order[: hits[-1] + 1]] = True
    else:
        raise ParameterError(f"{method.value} is not a classical adjustment")
    return reject
