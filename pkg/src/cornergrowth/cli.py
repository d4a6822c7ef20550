"""Command-line entry point: ``cornergrowth run | emit-plot-data | list-experiments``.

Exit codes: 0 success, 1 an experiment's own check failed, 2 invalid
configuration or input, 3 runtime failure (with the replica seed).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    DESCRIPTIONS,
    SCHEMAS,
    ConfigError,
    ReplicaError,
    format_cell,
    load_config,
    resolve_config,
    run_experiment,
    write_result,
)

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _param_keys() -> list[str]:
    keys = []
    for schema in SCHEMAS.values():
        keys += [k for k in schema if k not in keys]
    return keys


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cornergrowth", description="Corner growth model experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("--experiment", help="experiment name (see list-experiments)")
    run.add_argument("--config", help="flat key = value config file; flags override it")
    run.add_argument("--seed", help="master seed (unsigned 64-bit integer)")
    run.add_argument("--threads", help="worker threads")
    run.add_argument("--out", help="directory for <experiment>.csv and <experiment>.json")
    run.add_argument("--save-config", help="write the resolved config to this path")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="set any parameter")
    params = run.add_argument_group("experiment parameters (lists are comma separated)")
    for key in _param_keys():
        params.add_argument(_flag(key), dest=f"param_{key}", metavar="VALUE")
    run.set_defaults(func=cmd_run)

    plot = sub.add_parser("emit-plot-data", help="reshape result CSVs into plot-ready CSV")
    plot.add_argument("files", nargs="+", help="result CSV files")
    plot.add_argument("--kind", required=True, choices=["tail", "trend", "histogram"])
    plot.add_argument("--out", help="output CSV path (default stdout)")
    plot.add_argument("--column", default=None, help="histogram column (default: value, else estimate)")
    plot.add_argument("--bins", type=int, default=50, help="histogram bins")
    plot.add_argument("--size", type=int, default=None, help="N for tail data (default the largest)")
    plot.set_defaults(func=cmd_emit_plot_data)

    lst = sub.add_parser("list-experiments", help="list experiments and their parameters")
    lst.set_defaults(func=cmd_list)
    return parser


def _raw_config(args) -> dict:
    raw = load_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    for name in ("experiment", "seed", "threads"):
        if getattr(args, name) is not None:
            raw[name] = getattr(args, name)
    for key in _param_keys():
        v = getattr(args, f"param_{key}")
        if v is not None:
            raw[key] = v
    return raw


def cmd_run(args) -> int:
    try:
        cfg = resolve_config(_raw_config(args))
    except ConfigError as e:
        print(f"config error in '{e.key}': {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.save_config:
        Path(args.save_config).write_text(cfg.to_text())
    try:
        result = run_experiment(cfg)
    except ReplicaError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        print(f"replica seed: {e.seed}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:  # noqa: BLE001 - reported with the master seed
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        print(f"replica seed: {cfg.seed} (master)", file=sys.stderr)
        return EXIT_RUNTIME
    for line in result.lines:
        print(line)
    if args.out:
        csv_path, json_path = write_result(cfg, result, args.out)
        print(f"wrote {csv_path} and {json_path}")
    return 0 if result.ok else EXIT_CHECK_FAILED


def cmd_list(args) -> int:
    for name, schema in SCHEMAS.items():
        print(f"{name}: {DESCRIPTIONS[name]}")
        for key, spec in schema.items():
            default = ",".join(map(str, spec.default)) if isinstance(spec.default, list) else spec.default
            print(f"    {_flag(key)} ({spec.kind}, default {default}): {spec.help}")
    return 0


# ---------------------------------------------------------------- plot data


class InputError(ValueError):
    pass


def _read_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        try:
            with open(path, newline="") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames is None:
                    raise InputError(f"{path} is empty")
                rows += list(reader)
        except OSError as e:
            raise InputError(f"cannot read {path}: {e}") from None
    if not rows:
        raise InputError("no rows in the input files")
    return rows


def _float(row, key):
    try:
        return float(row[key])
    except (KeyError, TypeError, ValueError):
        raise InputError(f"row lacks a numeric '{key}' column: {row}") from None


TREND_AXES = {
    "exit-exponent": ("mean_abs_z", "N", True),
    "cylinder": ("P(miss)", "r", False),
    "w-event": ("P(W)", "N", False),
    "no-axis": ("median_sup", "eta1", False),
}


def trend_points(rows) -> list[tuple[float, float]]:
    """(x, y) pairs: (log N, log E|Z|) for exit exponents, (r, P(miss)) for cylinders, and so on."""
    exp = rows[0].get("experiment")
    if exp not in TREND_AXES:
        raise InputError(f"no trend data for experiment {exp!r}")
    quantity, xkey, logs = TREND_AXES[exp]
    pts = [(_float(r, xkey), _float(r, "estimate")) for r in rows if r.get("quantity") == quantity]
    if logs:
        if any(x <= 0 or y <= 0 for x, y in pts):
            raise InputError("log trend needs positive values")
        pts = [(math.log(x), math.log(y)) for x, y in pts]
    return pts


def tail_points(rows, size=None) -> list[tuple[float, float]]:
    exp = rows[0].get("experiment")
    if exp == "cylinder":
        return [(_float(r, "r"), _float(r, "estimate")) for r in rows if r.get("quantity") == "P(miss)"]
    if exp != "exit-exponent":
        raise InputError(f"no tail data for experiment {exp!r}")
    tail = [r for r in rows if r.get("quantity") == "tail"]
    sizes = sorted({int(_float(r, "N")) for r in tail})
    if not sizes:
        raise InputError("no tail rows")
    N = sizes[-1] if size is None else int(size)
    if N not in sizes:
        raise InputError(f"size {N} not in {sizes}")
    return [(_float(r, "t"), _float(r, "estimate")) for r in tail if int(_float(r, "N")) == N]


def histogram(values, bins: int = 50):
    """Equal-width bins over the sample range: (lo, hi, count) triples."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InputError("no values to bin")
    counts, edges = np.histogram(x, bins=bins)
    return list(zip(edges[:-1], edges[1:], counts))


def cmd_emit_plot_data(args) -> int:
    try:
        if args.bins < 1:
            raise InputError("--bins must be positive")
        rows = _read_rows(args.files)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if args.kind == "histogram":
            col = args.column or ("value" if "value" in rows[0] else "estimate")
            vals = [_float(r, col) for r in rows]
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in histogram(vals, args.bins):
                w.writerow([format_cell(float(lo)), format_cell(float(hi)), int(c)])
        else:
            pts = trend_points(rows) if args.kind == "trend" else tail_points(rows, args.size)
            w.writerow(["x", "y"])
            for x, y in pts:
                w.writerow([format_cell(x), format_cell(y)])
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
