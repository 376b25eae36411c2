"""Command-line front end.

Subcommands: ``cmin`` (minimum serve-rate sweep), ``allocate`` (joint
power/feedback cost sweep, rounded and exhaustive methods side by side),
``validate-cdf`` (Monte Carlo vs analytic SINR cdf), ``simulate-queue``
(slot-based deadline queue) and ``thresholds`` (echo the modulation table).
Every command is deterministic given config and seed and writes only to the
configured output path (stdout when none is given).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .allocator import InfeasibleError, allocate_exhaustive, allocate_rounded
from .amc import linear_to_db
from .config import ConfigError, RunConfig
from .simulator import dump_samples, empirical_sinr, ks_statistic, simulate_queue
from .sinr import (
    SinrModelParams,
    cdf_interference_limited,
    cdf_limited_feedback,
    cdf_noise_limited,
)
from .traffic import min_serve_rate, min_serve_rate_approx

_CDFS = {
    "general": cdf_limited_feedback,
    "interference_limited": cdf_interference_limited,
    "noise_limited": cdf_noise_limited,
}


def _error_line(kind, message):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _format_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _render(columns, rows, fmt):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])
        return buf.getvalue()
    return json.dumps(rows, indent=2, allow_nan=True) + "\n"


def _run_cmin(cfg, args):
    axes = cfg.sweep_axes()
    spec0 = cfg.traffic_spec()
    rows = []
    for lam in sorted(axes["lambda"]):
        for d in sorted(axes["d_max"]):
            from dataclasses import replace

            spec = replace(spec0, arrival_rate=lam, d_max=d)
            rows.append(
                {
                    "lambda": lam,
                    "d_max": d,
                    "c_min_exact": min_serve_rate(spec),
                    "c_min_approx": min_serve_rate_approx(spec),
                }
            )
    return ("lambda", "d_max", "c_min_exact", "c_min_approx"), rows, 0


def _run_allocate(cfg, args):
    axes = cfg.sweep_axes()
    rows = []
    feasible_rows = 0
    for xi in sorted(axes["xi"]):
        for d in sorted(axes["d_max"]):
            for regime in axes["regime"]:
                problem = cfg.allocation_problem(d_max=d, xi=xi, regime=regime)
                for method, solver in (
                    ("exhaustive", allocate_exhaustive),
                    ("relax-round", allocate_rounded),
                ):
                    row = {
                        "xi": xi,
                        "d_max": d,
                        "method": method,
                        "b": None,
                        "p_db": None,
                        "cost": None,
                        "achieved_violation": None,
                        "status": "infeasible",
                    }
                    try:
                        res = solver(problem)
                    except InfeasibleError:
                        rows.append(row)
                        continue
                    feasible_rows += 1
                    row.update(
                        b=res.b,
                        p_db=round(linear_to_db(res.p), 1),
                        cost=res.cost,
                        achieved_violation=res.achieved_violation,
                        status="ok",
                    )
                    rows.append(row)
    columns = ("xi", "d_max", "method", "b", "p_db", "cost", "achieved_violation", "status")
    if feasible_rows == 0:
        _error_line("infeasible", "no sweep point admits a feasible allocation")
        return columns, rows, 3
    return columns, rows, 0


def _run_validate_cdf(cfg, args):
    points = cfg.validate_points()
    n_t = cfg.tree["sinr"]["n_t"]
    rows = []
    failed = 0
    for i, pt in enumerate(points):
        link = cfg.link_config(
            seed=args.seed, b=pt["b"], gamma=pt["gamma"], trials=pt["trials"]
        )
        samples = empirical_sinr(link)
        params = SinrModelParams(
            n_t=n_t, b=pt["b"], gamma=pt["gamma"], sigma2=cfg.tree["sinr"]["sigma2"]
        )
        cdf = _CDFS[pt["regime"]]
        ks = ks_statistic(samples, lambda x: cdf(params, x))
        passed = ks <= pt["threshold"]
        failed += not passed
        if args.dump_samples:
            path = args.dump_samples
            if len(points) > 1:
                path = f"{path}.point{i}"
            dump_samples(path, samples)
        rows.append(
            {
                "regime": pt["regime"],
                "b": pt["b"],
                "gamma": pt["gamma"],
                "trials": pt["trials"],
                "ks_distance": ks,
                "passed": passed,
            }
        )
    code = 0
    if failed:
        _error_line("cdf-validation-failed", f"{failed} of {len(points)} points failed")
        code = 1
    return ("regime", "b", "gamma", "trials", "ks_distance", "passed"), rows, code


def _run_simulate_queue(cfg, args):
    stats = simulate_queue(cfg.queue_config(seed=args.seed))
    payload = {
        "dropped_fraction": stats.dropped_fraction,
        "rho_hat_est": stats.rho_hat_est,
        "mode_histogram": list(stats.mode_histogram),
    }
    return None, payload, 0


def _run_thresholds(cfg, args):
    table = cfg.modulation_table()
    rows = []
    for m, omega in zip(table.modes, table.thresholds[1:-1]):
        rows.append(
            {
                "n": m.index,
                "name": m.name,
                "per_scale": m.per_scale,
                "per_slope": m.per_slope,
                "cutoff_snr_db": linear_to_db(m.cutoff_snr),
                "omega_linear": omega,
                "omega_db": linear_to_db(omega),
            }
        )
    columns = ("n", "name", "per_scale", "per_slope", "cutoff_snr_db", "omega_linear", "omega_db")
    return columns, rows, 0


_COMMANDS = {
    "cmin": _run_cmin,
    "allocate": _run_allocate,
    "validate-cdf": _run_validate_cdf,
    "simulate-queue": _run_simulate_queue,
    "thresholds": _run_thresholds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=int, metavar="U64", help="override link.seed")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    parser = argparse.ArgumentParser(
        prog="mimoqos",
        description="Delay-constrained power/feedback allocation and validation tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cmin", parents=[common], help="minimum serve-rate sweep")
    sub.add_parser("allocate", parents=[common], help="joint allocation cost sweep")
    val = sub.add_parser("validate-cdf", parents=[common], help="Monte Carlo cdf check")
    val.add_argument("--dump-samples", metavar="PATH", help="write raw SINR samples")
    sub.add_parser("simulate-queue", parents=[common], help="slot-based queue simulation")
    sub.add_parser("thresholds", parents=[common], help="echo the modulation table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "dump_samples"):
        args.dump_samples = None
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig.from_dict({})
    except (ConfigError, OSError) as exc:
        _error_line("config", str(exc))
        return 2

    out_path = args.out if args.out is not None else cfg.tree["output"]["path"]
    fmt = args.format if args.format is not None else cfg.tree["output"]["format"]

    try:
        columns, result, code = _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        _error_line("config", str(exc))
        return 2

    if columns is None:  # simulate-queue emits a single JSON object
        text = json.dumps(result, indent=2, allow_nan=True) + "\n"
    else:
        text = _render(columns, result, fmt)
    _emit(text, out_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
