"""Command-line front end.

Subcommands: ``params``, ``distance``, ``scan``, ``verify``, ``pde`` and
``sample``. Output goes to ``--out`` or stdout as CSV or JSON with 17
significant digits. Exit codes: 0 success, 1 verification or numerical
failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import List, Optional, Sequence

from . import cutoff, pde
from .barenblatt import params_from_alpha, params_from_m
from .divergences import distance_report
from .errors import ConstraintError, FdCutoffError, InsufficientData
from .oracles.sampling import sample_barenblatt
from .serialize import dumps, format_number
from .verify import SUITES, report_json, run_suite

__all__ = ["main", "build_parser", "resolve_threads"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def resolve_threads(flag: Optional[int]) -> int:
    """``--threads`` if given, else ``CUTOFF_THREADS``, else 0; 0 means all cores."""
    if flag is None:
        env = os.environ.get("CUTOFF_THREADS", "").strip()
        try:
            flag = int(env) if env else 0
        except ValueError:
            raise UsageError(f"CUTOFF_THREADS must be an integer, got {env!r}")
    if flag < 0:
        raise UsageError("--threads must be >= 0")
    return flag if flag > 0 else (os.cpu_count() or 1)


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> List[int]:
    out = []
    for x in text.split(","):
        x = x.strip()
        if not x:
            continue
        v = float(x)
        if v != int(v):
            raise argparse.ArgumentTypeError(f"dimension {x!r} is not an integer")
        out.append(int(v))
    return out


def _str_list(text: str) -> List[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_model_args(p: argparse.ArgumentParser, d_required: bool = True) -> None:
    p.add_argument("--d", type=int, required=d_required, help="dimension")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, help="self-similarity exponent 1/(2 - d(1 - m))")
    g.add_argument("--m", type=float, help="nonlinearity exponent")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed")
    common.add_argument("--threads", type=int, default=None, help="worker threads, 0 = all cores")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--config", default=None, help="JSON file of option defaults; flags win")

    parser = argparse.ArgumentParser(
        prog="fdcutoff", description="Fast-diffusion Fokker-Planck cutoff toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", parents=[common], help="derived constants of one model")
    _add_model_args(p)

    p = sub.add_parser("distance", parents=[common], help="W2^2, entropy and Fisher information at one point")
    _add_model_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x0", type=float, default=0.0, help="|x0|")

    p = sub.add_parser("scan", parents=[common], help="cutoff scan over dimensions")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float)
    g.add_argument("--m", type=float)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--dims", type=_int_list, default=list(cutoff.DEFAULT_DIMS), help="comma-separated")
    p.add_argument("--metrics", type=_str_list, default=[m.value for m in cutoff.Metric])
    p.add_argument("--sides", type=_str_list, default=[s.value for s in cutoff.Side])

    p = sub.add_parser("verify", parents=[common], help="oracle verification suites")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])

    p = sub.add_parser("pde", parents=[common], help="finite-volume fixture against the closed form")
    p.add_argument("--geometry", choices=("line", "radial"), default="line")
    p.add_argument("--d", type=int, default=None, help="dimension (radial only; line means d = 1)")
    p.add_argument("--m", type=float, required=False)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--cells", type=int, default=4096)
    p.add_argument("--extent", type=float, default=12.0)
    p.add_argument("--t0", type=float, default=0.05)
    p.add_argument("--t-end", dest="t_end", type=float, default=2.0)
    p.add_argument("--method", choices=("explicit", "implicit"), default="implicit")
    p.add_argument("--snapshots", type=_float_list, default=None, help="output times, comma-separated")

    p = sub.add_parser("sample", parents=[common], help="draws from the stationary profile")
    _add_model_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x0", type=float, default=0.0, help="shift along the first axis")
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        if isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
            return action.choices[name]
    raise KeyError(name)


def _parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for key in ("dims", "metrics", "sides", "snapshots"):
            if isinstance(cfg.get(key), str):
                cfg[key] = {"dims": _int_list, "snapshots": _float_list}.get(key, _str_list)(cfg[key])
        sp = _subparser(parser, args.command)
        known = {a.dest for a in sp._actions}  # noqa: SLF001
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # config becomes the defaults, so explicit flags still win
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _model(args) -> "object":
    if (args.alpha is None) == (args.m is None):
        raise UsageError("give exactly one of --alpha and --m")
    return params_from_alpha(args.d, args.alpha) if args.alpha is not None else params_from_m(args.d, args.m)


def _csv_rows(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format_number(v)
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def cmd_params(args) -> tuple:
    params = _model(args)
    if not params.has_second_moment:
        raise ConstraintError(
            f"v_inf has no second moment: needs m > d/(d+2) = {params.d / (params.d + 2):.17g}, got m = {params.m!r}"
        )
    doc = params.as_dict()
    if args.format == "csv":
        return _csv_rows(list(doc), [list(doc.values())]), EXIT_OK
    return dumps(doc) + "\n", EXIT_OK


def cmd_distance(args) -> tuple:
    params = _model(args)
    if not args.t > 0.0:
        raise ConstraintError("t must be > 0")
    doc = distance_report(params, args.t, args.x0).as_dict()
    if args.format == "csv":
        return _csv_rows(list(doc), [list(doc.values())]), EXIT_OK
    return dumps(doc) + "\n", EXIT_OK


SCAN_COLUMNS = ("d", "side", "eps", "t", "metric", "sup_dist", "x0_norm")


def _trend_summary(rows) -> list:
    out = []
    keys = []
    for r in rows:
        if (r.metric, r.side) not in keys:
            keys.append((r.metric, r.side))
    for metric, side in keys:
        sub = [r for r in rows if r.metric is metric and r.side is side]
        entry = {"metric": metric.value, "side": side.value}
        try:
            fit = cutoff.trend_fit(sub)
            entry.update(slope=fit.slope, r_squared=fit.r_squared, verdict=fit.verdict.value, n_points=fit.n_points)
        except InsufficientData as exc:
            entry.update(slope=None, r_squared=None, verdict=None, n_points=sum(r.finite for r in sub), error=str(exc))
        spec = cutoff.ScheduleSpec(sub[0].mode, sub[0].value, sub[0].eps, sub[0].r, sub[0].theta, side)
        entry["predicted_slope"] = cutoff.predicted_slope(spec)
        out.append(entry)
    return out


def cmd_scan(args) -> tuple:
    if (args.alpha is None) == (args.m is None):
        raise UsageError("give exactly one of --alpha and --m")
    if not args.dims:
        raise UsageError("--dims must list at least one dimension")
    mode = cutoff.Mode.FIXED_ALPHA if args.alpha is not None else cutoff.Mode.FIXED_M
    value = args.alpha if args.alpha is not None else args.m
    try:
        metrics = [cutoff.Metric(m) for m in args.metrics]
        sides = [cutoff.Side(s) for s in args.sides]
    except ValueError as exc:
        raise UsageError(str(exc))
    if not metrics or not sides:
        raise UsageError("--metrics and --sides must be nonempty")
    spec = cutoff.ScheduleSpec(mode, value, args.eps, args.r, args.theta, sides[0])
    rows = cutoff.scan(spec, args.dims, metrics, sides)
    trend = _trend_summary(rows)
    table = [[r.d, r.side, r.eps, r.t, r.metric, r.sup_dist, r.x0_norm] for r in rows]
    if args.format == "json":
        doc = {
            "config": {
                "mode": mode.value, "value": value, "eps": args.eps, "r": args.r,
                "theta": args.theta, "dims": list(args.dims),
            },
            "rows": [dict(zip(SCAN_COLUMNS, [_cell(v) if hasattr(v, "value") else v for v in row])) for row in table],
            "trend": trend,
        }
        return dumps(doc) + "\n", EXIT_OK
    text = _csv_rows(SCAN_COLUMNS, table)
    return text + "# " + dumps({"trend": trend}, indent=None) + "\n", EXIT_OK


def cmd_verify(args) -> tuple:
    checks = run_suite(args.suite, args.seed, resolve_threads(args.threads))
    text = report_json(args.suite, args.seed, checks)
    return text, EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


def cmd_pde(args) -> tuple:
    if args.m is None:
        raise UsageError("--m is required")
    if args.geometry == "line":
        if args.d not in (None, 1):
            raise UsageError("line geometry is d = 1")
        d = 1
    else:
        d = 3 if args.d is None else args.d
    params = params_from_m(d, args.m)
    grid = pde.GridSpec(args.geometry, args.cells, args.extent)
    state = pde.init_from_closed_form(params, args.t0, args.x0, grid)
    times = args.snapshots if args.snapshots is not None else [args.t0, args.t_end]
    final, traj = pde.evolve(state, args.t_end, method=args.method, snapshot_times=times)
    summary = {
        "geometry": args.geometry, "d": d, "m": params.m, "x0": args.x0, "cells": args.cells,
        "extent": args.extent, "t0": args.t0, "t_end": args.t_end, "method": args.method,
        "steps": len(traj.times) - 1,
        "l1_error": [{"time": s.time, "l1": pde.l1_error(s)} for s in traj.snapshots],
        "max_entropy_increase": traj.max_entropy_increase,
        "final_entropy": traj.entropies[-1],
        "mass_drift": max(abs(x - 1.0) for x in traj.masses),
        "mass_lost": final.mass_lost,
    }
    if args.geometry == "radial" and params.regime.compact:
        summary["front"] = [
            {"time": s.time, "numerical": pde.numerical_front(s), "exact": pde.exact_front(s)}
            for s in traj.snapshots
        ]
    if args.format == "json":
        summary["snapshots"] = [
            {"time": s.time, "cell_center": list(s.grid.centers), "value": list(s.values)} for s in traj.snapshots
        ]
        return dumps(summary) + "\n", EXIT_OK
    buf = io.StringIO()
    pde.write_trajectory_csv(traj.snapshots, buf)
    return buf.getvalue() + "# " + dumps(summary, indent=None) + "\n", EXIT_OK


def cmd_sample(args) -> tuple:
    params = _model(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    x0 = [0.0] * params.d
    x0[0] = args.x0
    cloud = sample_barenblatt(params, args.n, x0, args.seed)
    header = ["index"] + [f"x_{i + 1}" for i in range(params.d)]
    rows = ([i] + [float(v) for v in pt] for i, pt in enumerate(cloud.points))
    if args.format == "json":
        doc = {"seed": args.seed, "d": params.d, "m": params.m, "points": [list(map(float, pt)) for pt in cloud.points]}
        return dumps(doc) + "\n", EXIT_OK
    return _csv_rows(header, rows), EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "distance": cmd_distance,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "pde": cmd_pde,
    "sample": cmd_sample,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"fdcutoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.seed < 0 or args.seed >= 2**64:
            raise UsageError("--seed must lie in [0, 2^64)")
        resolve_threads(args.threads)
        text, code = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        # DomainError and ConstraintError are ValueErrors
        print(f"fdcutoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FdCutoffError, ArithmeticError, RuntimeError) as exc:
        print(f"fdcutoff: failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
