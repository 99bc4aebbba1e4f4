"""Command-line interface.

Subcommands ``point``, ``measure``, ``sweep``, ``mc`` and ``stability``
print JSON on stdout (CSV with ``--csv``). Exit status is 0 on success,
2 for bad input (configuration, files, arguments) and 3 for model errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .duan import duan_check
from .errors import GridTooCoarse, InputError, ModelError
from .gaussian import Normalization, load_cm, negativity_report, rescale, validate_cm
from .model import SimConfig, output_covariance, stability_check
from .noise_mc import McConfig, en_distribution, required_precision
from .sweep import evaluate_point, find_peak, parse_axis, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_MODEL = 0, 2, 3


def _common(defaults: bool) -> argparse.ArgumentParser:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=d(None), help="TOML configuration file (built-in defaults if omitted)")
    p.add_argument("--out", default=d(None), help="output file (sweep: path prefix for .csv/.json)")
    p.add_argument("--workers", type=int, default=d(1), help="parallel workers (results do not depend on it)")
    p.add_argument("--seed", type=int, default=d(7), help="Monte-Carlo seed")
    p.add_argument("--csv", action="store_true", default=d(False), help="emit CSV instead of JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ponderomotive",
        description="Two-carrier optomechanical entanglement simulator.",
        parents=[_common(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(False)

    p = sub.add_parser("point", parents=[common], help="all measures at one frequency")
    p.add_argument("--frequency", type=float, default=20e3, help="sideband frequency [Hz]")
    p.add_argument("--log2", action="store_true", help="also report E_N in bits")

    p = sub.add_parser("measure", parents=[common], help="measures of a stored covariance matrix")
    p.add_argument("matrix", help="matrix file (.json or 4-line text)")
    p.add_argument("--log2", action="store_true", help="also report E_N in bits")

    p = sub.add_parser("sweep", parents=[common], help="1-D or 2-D parameter sweep")
    p.add_argument("axes", nargs="+", help="axis spec param:scale:start:stop:points (one or two)")
    p.add_argument("--frequency", type=float, default=20e3, help="evaluation frequency when no axis is frequency [Hz]")

    p = sub.add_parser("mc", parents=[common], help="Monte-Carlo noise propagation")
    p.add_argument("--matrix", help="matrix file; otherwise the model output at --frequency")
    p.add_argument("--frequency", type=float, default=20e3)
    p.add_argument("--sigma", type=float, default=1e-3, help="relative (or absolute) entry noise")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--absolute", action="store_true", help="treat --sigma as an absolute standard deviation")
    p.add_argument("--draws", help="write per-draw E_N values to this CSV file")
    p.add_argument("--target-ratio", type=float, help="also report the noise level giving std/E_N = target")

    p = sub.add_parser("stability", parents=[common], help="Nyquist stability of the optical spring")
    p.add_argument("--points", type=int, default=4096)
    return parser


def _load_cfg(args) -> SimConfig:
    return load_config(args.config) if args.config else SimConfig()


def _emit(args, payload: dict, csv_rows: list | None = None) -> str:
    if args.csv and csv_rows is not None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"
    sys.stdout.write(text)
    if args.out and args.command != "sweep":
        Path(args.out).write_text(text, encoding="utf-8")
    return text


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def cmd_point(args) -> int:
    cfg = _load_cfg(args)
    rep = evaluate_point(cfg, args.frequency)
    payload = rep.to_dict()
    if args.log2:
        payload["E_N_log2"] = rep.E_N / math.log(2.0)
    rows = [
        ["frequency_hz", "E_N", "duan_R", "qt_ratio", "stable"],
        [repr(rep.frequency_hz), repr(rep.E_N), repr(rep.duan_R), repr(rep.qt_ratio), int(rep.stability.stable)],
    ]
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_measure(args) -> int:
    cm = load_cm(args.matrix)
    if cm.normalization is Normalization.VacuumOne:
        half = rescale(cm, Normalization.VacuumHalf)
    else:
        half = cm
    neg = negativity_report(half)
    duan = duan_check(cm)
    payload = {
        "normalization": cm.normalization.value,
        "E_N": neg.value,
        "nu_minus": neg.nu_minus,
        "nonphysical": neg.nonphysical,
        "duan": duan.to_dict(),
        "validation": validate_cm(cm).to_dict(),
    }
    if args.log2:
        payload["E_N_log2"] = neg.value / math.log(2.0)
    rows = [["E_N", "nu_minus", "duan_R", "physical"], [repr(neg.value), repr(neg.nu_minus), repr(duan.R), int(validate_cm(cm).passed)]]
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if len(args.axes) > 2:
        raise InputError("at most two axes")
    axes = [parse_axis(a) for a in args.axes]
    cfg = _load_cfg(args)
    res = run_sweep(cfg, axes, workers=args.workers, frequency_hz=args.frequency)
    prefix = Path(args.out) if args.out else Path("sweep")
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    res.to_csv(csv_path)
    res.to_json(json_path)
    peak = find_peak(res, along=0)
    summary = {
        "csv": str(csv_path),
        "json": str(json_path),
        "cells": int(res.E_N.size),
        "entangled_cells": int(np.count_nonzero(res.E_N > 0)),
        "unstable_cells": int(np.count_nonzero(~res.stable)),
        "peak": peak.to_dict(),
    }
    if args.csv:
        sys.stdout.write(res.to_csv())
    else:
        _emit(args, summary)
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    if args.sigma < 0:
        raise InputError("--sigma must be >= 0")
    if args.matrix:
        cm = load_cm(args.matrix)
        if cm.normalization is Normalization.VacuumOne:
            cm = rescale(cm, Normalization.VacuumHalf)
        source = {"matrix": args.matrix}
    else:
        cfg = _load_cfg(args)
        cm = output_covariance(cfg, 2.0 * math.pi * args.frequency)
        source = {"config": args.config or "builtin", "frequency_hz": args.frequency}
    mc = McConfig(args.sigma, args.samples, args.seed, args.absolute)
    res, draws = en_distribution(cm, mc, workers=args.workers, return_draws=True)
    payload = res.to_dict()
    payload["seed"] = args.seed
    payload["source"] = source
    if args.target_ratio is not None:
        payload["required_precision"] = required_precision(cm, args.target_ratio, samples=args.samples, seed=args.seed)
    if args.draws:
        with open(args.draws, "w", encoding="utf-8", newline="") as fh:
            fh.write("draw,E_N\n")
            for i, e in enumerate(draws):
                fh.write(f"{i},{format(float(e), '.17g')}\n")
    rows = [["mean", "std", "ci67_low", "ci67_high", "clamped_fraction", "samples", "sigma"],
            [repr(res.mean_EN), repr(res.std_EN), repr(res.ci67_low), repr(res.ci67_high),
             repr(res.clamped_fraction), res.samples, repr(res.sigma)]]
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_stability(args) -> int:
    cfg = _load_cfg(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GridTooCoarse)
        rep = stability_check(cfg, points=args.points)
    payload = rep.to_dict()
    payload["warnings"] = [str(w.message) for w in caught]
    rows = [["stable", "margin", "winding"], [int(rep.stable), repr(rep.margin), rep.winding]]
    _emit(args, payload, rows)
    return EXIT_OK


COMMANDS = {
    "point": cmd_point,
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "mc": cmd_mc,
    "stability": cmd_stability,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        field = getattr(exc, "field", None)
        extra = f" [field: {field}]" if field else ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"model error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
