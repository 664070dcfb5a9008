"""Command-line front end: ``rase synth | run | sweep | attack``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError, DataError, RaseError
from .harness import SWEEP_PARAMS, attack_published, run_trace, sweep
from .pipeline import RunConfig
from .randomizer import DataRange
from .traces import REFIT_RANGE, ingest, synth, write_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _load_json(path: str, what: str, error=ConfigError) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise error(f"{what} {path}: cannot open ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise error(f"{what} {path}: invalid JSON at line {exc.lineno} ({exc.msg})") from exc


def _config(args: argparse.Namespace) -> RunConfig:
    data = _load_json(args.config, "config")
    if not isinstance(data, dict):
        raise ConfigError(f"config {args.config}: expected a JSON object")
    overrides = {
        "seed": getattr(args, "seed", None),
        "window_w": getattr(args, "window", None),
        "estimator": getattr(args, "estimator", None),
        "bootstrap_b": getattr(args, "bootstrap_b", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def _write_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _warn_rejected(rejected: dict) -> None:
    for why in rejected.values():
        print(f"warning: skipped {why}", file=sys.stderr)


def cmd_synth(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ConfigError(f"n: must be >= 1, got {args.n}")
    if args.timestamps < 1:
        raise ConfigError(f"timestamps: must be >= 1, got {args.timestamps}")
    data_range = DataRange(args.x_min, args.x_max)
    write_trace(args.output, synth(args.n, args.timestamps, data_range, args.seed))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(args)
    trace = ingest(args.input, config.n, config.range)
    _warn_rejected(trace.rejected)
    report = run_trace(trace.batches, config, trace.rejected)
    _write_json(report, args.output)
    return EXIT_OK


def _parse_values(raw: str, param: str) -> list:
    out = []
    for item in raw.split(","):
        item = item.strip()
        try:
            out.append(int(item) if param in ("k", "n") else float(item))
        except ValueError as exc:
            raise ConfigError(f"values: cannot parse {item!r} for {param}") from exc
    if not out:
        raise ConfigError("values: empty list")
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"param: expected one of {', '.join(SWEEP_PARAMS)}, got {args.param!r}")
    values = _parse_values(args.values, args.param)
    config = _config(args)
    trace = ingest(args.input, config.n, config.range)
    _warn_rejected(trace.rejected)
    rows = sweep(trace.batches, config, args.param, values, args.trials)
    columns = ("param_value", "aae", "mse", "precision", "recall")
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else repr(row[c]) for c in columns])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    report = _load_json(args.report, "report", DataError)
    try:
        config = RunConfig.from_dict(report["config"])
        published = [(row["t"], row["values"], row["slot_owner"]) for row in report["timestamps"]]
    except (KeyError, TypeError) as exc:
        raise DataError(f"report {args.report}: missing field {exc}") from exc
    changes = {}
    if args.profile:
        changes["attack_profile"] = args.profile
    if args.assignment:
        changes["attack_assignment"] = args.assignment
    if args.history:
        changes["attack_history"] = args.history
    config = dataclasses.replace(config, **changes)
    trace = ingest(args.input, config.n, config.range)
    metrics = attack_published(trace.batches, published, config)
    if metrics is None:
        raise DataError(
            f"not enough data to attack: need {config.attack_history} history timestamps and at least one more"
        )
    trained = set(sorted(trace.batches)[: config.attack_history])
    _write_json(
        {
            "precision": metrics.precision,
            "recall": metrics.recall,
            "attacked_timestamps": [t for t, _, _ in published if t not in trained],
            "config": config.to_dict(),
        },
        args.output,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rase", description="Randomize, shuffle and estimate sensor aggregates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic load trace")
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=int, default=50, help="number of devices")
    p.add_argument("--timestamps", type=int, default=100, help="number of timestamps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x-min", type=float, default=REFIT_RANGE.x_min)
    p.add_argument("--x-max", type=float, default=REFIT_RANGE.x_max)
    p.set_defaults(func=cmd_synth)

    def add_run_flags(p):
        p.add_argument("--config", required=True)
        p.add_argument("--input", required=True, help="trace CSV")
        p.add_argument("--output", help="output path (stdout if omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--estimator", choices=("sample", "mle", "bootstrap"))
        p.add_argument("--bootstrap-b", type=int)

    p = sub.add_parser("run", help="run the pipeline over a trace and write a JSON report")
    add_run_flags(p)
    p.add_argument("--window", type=int, help="add windowed averages of this width")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one parameter and write a CSV of averaged metrics")
    add_run_flags(p)
    p.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--trials", type=int, default=10)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attack", help="re-run the linkage attack on a report")
    p.add_argument("--report", required=True)
    p.add_argument("--input", required=True, help="trace CSV the report was produced from")
    p.add_argument("--output")
    p.add_argument("--profile", choices=("gaussian", "laplace"))
    p.add_argument("--assignment", choices=("hungarian", "greedy"))
    p.add_argument("--history", type=int, help="timestamps of history the attacker trains on")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # unexpected failures still map to a documented code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
