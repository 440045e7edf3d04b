"""Command-line front end: ``clusterfx analyze | simulate | oracle-check``.

Exit codes: 0 on success, 1 when ``oracle-check`` finds a deviation, 2 on
invalid input (data or configuration errors).
"""
import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import analyze
from .covariance import assemble_sigma, cluster_summaries, v_hat
from .data import load_csv
from .errors import BadConfig, DataError
from .oracles import covariance_by_influence, pairwise_w_bruteforce, random_study
from .ranks import pairwise_w
from .sim import PRESETS, SimulationConfig, load_config, run_experiment

W_TOL = 1e-12
V_TOL = 1e-10


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("CLUSTERFX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise BadConfig("CLUSTERFX_THREADS", f"not an integer: {env!r}") from None
    return 1


def cmd_analyze(args, out):
    data = load_csv(args.input)
    report = analyze(data, alpha=args.alpha, transform=args.transform)
    out.write(report.to_json() + "\n" if args.json else report.to_text())
    return 0


_SETTING_COLUMNS = ("family", "n_c", "n_1", "n_2", "rho", "sigma2", "M", "alternative", "delta")


def _setting(cfg):
    d = cfg.to_dict()
    return [
        " ".join(repr(x) for x in d[k]) if isinstance(d[k], list) else str(d[k])
        for k in _SETTING_COLUMNS
    ]


def _write_grid(reports, out_dir, stem):
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SETTING_COLUMNS + ("effect", "rate", "mc_se", "runs"))
        for rep in reports:
            for r in rep.results:
                writer.writerow(_setting(rep.config) + [r.effect, repr(r.rate), repr(r.mc_se), r.runs])
    json_path = out_dir / f"{stem}.json"
    json_path.write_text(json.dumps([rep.to_dict() for rep in reports], indent=2) + "\n", encoding="utf-8")
    return csv_path, json_path


def cmd_simulate(args, out):
    base = load_config(args.config) if args.config else SimulationConfig()
    overrides = {k: getattr(args, k) for k in ("runs", "seed") if getattr(args, k) is not None}
    if overrides:
        base = base.replace(**overrides)
    workers = _threads(args.threads)
    out_dir = Path(args.out)
    if args.preset:
        configs = PRESETS[args.preset](base)
        reports = []
        for i, cfg in enumerate(configs, start=1):
            reports.append(run_experiment(cfg, workers=workers))
            out.write(f"[{i}/{len(configs)}] {' '.join(_setting(cfg))}: "
                      + ", ".join(f"{r.effect} {r.rate:.1f}" for r in reports[-1].results) + "\n")
        paths = _write_grid(reports, out_dir, args.preset)
    else:
        report = run_experiment(base, workers=workers)
        for r in report.results:
            out.write(f"{r.effect}: {r.rate:.2f}% (MC SE {r.mc_se:.2f}, runs {r.runs})\n")
        for w in report.warnings:
            out.write(f"warning: {w}\n")
        paths = report.write(out_dir)
    out.write("wrote " + ", ".join(str(p) for p in paths) + "\n")
    return 0


def oracle_check(n=20, seed=0):
    """Max deviations of the fast estimators from the brute-force oracles."""
    rng = np.random.default_rng(seed)
    w_dev = v_dev = 0.0
    for _ in range(n):
        data = random_study(rng, T=int(rng.integers(1, 4)))
        W = pairwise_w(data).W
        w_dev = max(w_dev, float(np.abs(W - pairwise_w_bruteforce(data)).max()))
        # compare before eigenvalue flooring, which the oracle does not apply
        sigma, _ = assemble_sigma(cluster_summaries(data, W))
        _, V_oracle = covariance_by_influence(data)
        v_dev = max(v_dev, float(np.abs(v_hat(sigma, data.N, data.T) - V_oracle).max()))
    return {"datasets": n, "seed": seed, "max_w_deviation": w_dev, "max_v_deviation": v_dev,
            "passed": w_dev <= W_TOL and v_dev <= V_TOL}


def cmd_oracle_check(args, out):
    summary = oracle_check(args.n, args.seed)
    out.write(f"datasets: {summary['datasets']} (seed {summary['seed']})\n")
    out.write(f"max |w_fast - w_oracle| = {summary['max_w_deviation']!r} (tol {W_TOL:g})\n")
    out.write(f"max |V_fast - V_oracle| = {summary['max_v_deviation']!r} (tol {V_TOL:g})\n")
    out.write("PASS\n" if summary["passed"] else "FAIL\n")
    return 0 if summary["passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="clusterfx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a group,cluster,period,visit,value CSV file")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--transform", choices=("identity", "logit"), default="logit")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable report")
    fmt.add_argument("--text", action="store_true", help="plain-text report (default)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run a Monte Carlo size/power experiment")
    p.add_argument("config", nargs="?", help="key = value or JSON configuration file")
    p.add_argument("--out", default="sim_out")
    p.add_argument("--threads", type=int, default=None, help="worker processes (env CLUSTERFX_THREADS)")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-check", help="compare fast estimators with brute-force oracles")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (DataError, BadConfig, OSError) as exc:
        where = f"{args.input}: " if getattr(args, "input", None) else ""
        sys.stderr.write(f"clusterfx {args.command}: {where}{type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
