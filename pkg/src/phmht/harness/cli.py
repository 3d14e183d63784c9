"""Command-line entry point.

Exit status: 0 on success, 1 on input or usage errors, 2 when an internal
guard refuses to continue (degenerate pools, oracle size limits).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from ..complexes import alpha_filtration_2d, build_distance_matrix, vietoris_rips
from ..errors import DegeneratePoolError, GuardError, InputError, PHMHTError
from ..metrics import InvariantSpec, MatchingCost, bottleneck_distance, wasserstein_distance
from ..mht import Battery, PermutationScheme, fdr_cutoff_test, fwer_max_test, two_sample_fdr
from ..persistence import read_diagram_csv, reduce, write_diagram_csv
from .config import ExperimentConfig
from .experiments import (
    rows_to_csv,
    run_exchangeability,
    run_fdr_experiment,
    run_level_experiment,
    run_limits,
    run_power_experiment,
    write_tables,
)
from .fixtures import load_fixtures, precompute_fixtures
from .io import load_clouds

log = logging.getLogger("phmht")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="root seed (overrides the config)")
    p.add_argument("--config", type=Path, default=None, help="experiment config JSON")
    p.add_argument("--out-dir", type=Path, default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--fixtures-dir", type=Path, default=None,
                   help="fixture directory (default: <out-dir>/fixtures)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="phmht", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("fixtures", parents=[common], help="precompute invariant pools")
    sub.add_parser("level", parents=[common], help="null rows of the rejection-rate table")
    sub.add_parser("power", parents=[common], help="noisy-circle rows of the rejection-rate table")
    sub.add_parser("fdr", parents=[common], help="FDR control on mixed batteries")
    sub.add_parser("exchangeability", parents=[common], help="ECDF/QQ exchangeability diagnostics")
    sub.add_parser("limits", parents=[common], help="LLN/CLT checks for persistent Betti numbers")

    for name in ("test-fwer", "test-fdr"):
        p = sub.add_parser(name, parents=[common], help="test user point clouds for acyclicity")
        p.add_argument("--clouds", type=Path, required=True, help="file or directory of clouds")
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--null-sims", type=int, default=99, help="null draws per cloud (N - 1)")
        p.add_argument("--invariant", choices=["max_bar_length", "log_max_bar_length"],
                       default="max_bar_length")
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--complex", choices=["alpha", "alpha_squared", "rips"], default="alpha")
        p.add_argument("--max-radius", type=float, default=None)

    p = sub.add_parser("test-two-sample", parents=[common], help="two-sample diagram tests with FDR")
    p.add_argument("--manifest", type=Path, required=True,
                   help='JSON {"pairs": [{"name", "group1": [csv...], "group2": [csv...]}]}')
    p.add_argument("--q", type=float, default=0.1, help="target FDR")
    p.add_argument("--p", type=float, default=2.0, help="Wasserstein exponent (inf for bottleneck)")
    p.add_argument("--q-exp", type=float, default=1.0, help="loss exponent")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--perms", type=int, default=999)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--raw-losses", action="store_true",
                   help="pool raw losses instead of per-pair studentized losses")

    p = sub.add_parser("diagram", parents=[common], help="persistence diagram of a point cloud")
    p.add_argument("--cloud", type=Path, required=True)
    p.add_argument("--complex", choices=["alpha", "alpha_squared", "rips"], default="alpha")
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--max-radius", type=float, default=None)

    p = sub.add_parser("distance", parents=[common], help="distance between two diagram CSVs")
    p.add_argument("--a", type=Path, required=True)
    p.add_argument("--b", type=Path, required=True)
    p.add_argument("--metric", choices=["bottleneck", "wasserstein"], default="bottleneck")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=1)
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed_root = args.seed
    return cfg


def _out(args) -> Path:
    out = args.out_dir or Path("phmht-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fixtures_dir(args) -> Path:
    return args.fixtures_dir or _out(args) / "fixtures"


def _emit(args, text: str, filename: str) -> None:
    if args.out_dir is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path = _out(args) / filename
        path.write_text(text if text.endswith("\n") else text + "\n")
        print(path)


def _report_text(report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "raw", "z", "rank", "reject", "adjusted_p"])
    for r in report.to_dict()["records"]:
        w.writerow([r["label"], r["raw"], r["z"], r["rank"], int(r["reject"]), r["adjusted_p"]])
    return buf.getvalue()


def _cmd_fixtures(args):
    cfg = _config(args)
    pool = precompute_fixtures(cfg, _fixtures_dir(args), threads=args.threads)
    print(f"{len(pool.values)} keys x {cfg.pool_size} in {_fixtures_dir(args)}")


def _cmd_table(args, runner, stem):
    cfg = _config(args)
    fx = load_fixtures(_fixtures_dir(args), cfg)
    for path in write_tables(runner(cfg, fx), _out(args), stem):
        print(path)


def _cmd_fdr(args):
    cfg = _config(args)
    fx = load_fixtures(_fixtures_dir(args), cfg)
    _emit(args, rows_to_csv(run_fdr_experiment(cfg, fx)), "fdr_control.csv")


def _cmd_exchangeability(args):
    cfg = _config(args)
    fx = load_fixtures(_fixtures_dir(args), cfg)
    summary = run_exchangeability(cfg, fx, _out(args))
    print(json.dumps(summary, indent=2, sort_keys=True))


def _cmd_limits(args):
    result = run_limits(_config(args), _out(args))
    print(json.dumps({k: v for k, v in result.items() if k != "lln"}, indent=2, sort_keys=True))


def _cmd_test(args, fdr: bool):
    clouds = load_clouds(args.clouds)
    if args.null_sims < 1:
        raise InputError("--null-sims must be >= 1")
    seed = args.seed if args.seed is not None else 0
    battery = Battery(clouds, InvariantSpec(args.invariant, args.dim), N=args.null_sims + 1,
                      seed_root=seed, complex_kind=args.complex, rips_radius=args.max_radius)
    test = fdr_cutoff_test if fdr else fwer_max_test
    report = test(battery, args.alpha, workers=args.threads)
    ext = "json" if args.format == "json" else "csv"
    _emit(args, _report_text(report, args.format), f"report_{'fdr' if fdr else 'fwer'}.{ext}")


def _cmd_two_sample(args):
    try:
        spec = json.loads(args.manifest.read_text())
        entries = spec["pairs"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise InputError(f"bad manifest {args.manifest}: {exc}") from exc
    base = args.manifest.parent
    pairs, names = [], []
    for k, e in enumerate(entries):
        g1 = [read_diagram_csv(base / f) for f in e["group1"]]
        g2 = [read_diagram_csv(base / f) for f in e["group2"]]
        pairs.append((g1, g2))
        names.append(e.get("name", f"pair{k}"))
    seed = args.seed if args.seed is not None else 0
    scheme = PermutationScheme(args.perms, seed, args.exhaustive)
    report = two_sample_fdr(pairs, args.dim, MatchingCost(args.p, args.q_exp), scheme, args.q,
                            labels=names, studentize=not args.raw_losses)
    ext = "json" if args.format == "json" else "csv"
    _emit(args, _report_text(report, args.format), f"report_two_sample.{ext}")


def _cmd_diagram(args):
    cloud = load_clouds(args.cloud)[0]
    if args.complex != "rips":
        f = alpha_filtration_2d(cloud, squared=args.complex == "alpha_squared")
    else:
        dm = build_distance_matrix(cloud)
        f = vietoris_rips(dm, args.max_dim, args.max_radius or float(dm.max()) or 1.0)
    d = reduce(f, cloud.label)
    if args.format == "json":
        pts = [[k, b, None if math.isinf(x) else x] for b, x, k in d.points()]
        text = json.dumps({"label": d.source_label, "points": pts})
    else:
        text = write_diagram_csv(d)
    _emit(args, text, f"{cloud.label}_diagram.{args.format}")


def _cmd_distance(args):
    a, b = read_diagram_csv(args.a), read_diagram_csv(args.b)
    if args.metric == "bottleneck":
        value = bottleneck_distance(a, b, args.dim)
    else:
        value = wasserstein_distance(a, b, args.dim, args.p)
    if args.format == "json":
        print(json.dumps({"metric": args.metric, "dim": args.dim, "p": args.p,
                          "distance": "inf" if math.isinf(value) else value}))
    else:
        print(repr(value))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"phmht: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "fixtures": _cmd_fixtures,
        "level": lambda a: _cmd_table(a, run_level_experiment, "level"),
        "power": lambda a: _cmd_table(a, run_power_experiment, "power"),
        "fdr": _cmd_fdr,
        "exchangeability": _cmd_exchangeability,
        "limits": _cmd_limits,
        "test-fwer": lambda a: _cmd_test(a, False),
        "test-fdr": lambda a: _cmd_test(a, True),
        "test-two-sample": _cmd_two_sample,
        "diagram": _cmd_diagram,
        "distance": _cmd_distance,
    }
    try:
        handlers[args.command](args)
    except (DegeneratePoolError, GuardError) as exc:
        print(f"phmht: guard: {exc}", file=sys.stderr)
        return 2
    except (InputError, PHMHTError, OSError) as exc:
        print(f"phmht: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
