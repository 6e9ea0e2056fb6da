"""Command line interface.

Subcommands:
    calibrate   Monte-Carlo calibration of one threshold constant
    monitor     run the monitoring loop on a numeric CSV
    simulate    draw from one of the simulation models into a CSV
    study       run a TOML-specified level/power study into a TSV
    data        restarting workflow on a dated CSV (prices or returns)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datagen, harness
from .calibration import (
    CalibrationTable,
    LimitGrid,
    ThresholdFamily,
    calibrate,
    default_table,
    load_table,
    save_table,
)
from .detectors import DetectorKind
from .functionals import FunctionalKind
from .monitor import MonitorConfig, run as run_monitor


def _table_path(out: str) -> Path:
    path = Path(out)
    if path.is_dir() or not path.suffix:
        path.mkdir(parents=True, exist_ok=True)
        return path / "calibration.tsv"
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _load_table_arg(arg: str | None) -> CalibrationTable:
    if arg is None:
        return default_table()
    path = Path(arg)
    if path.is_dir():
        path = path / "calibration.tsv"
    return load_table(path)


def _cmd_calibrate(args) -> int:
    grid = LimitGrid(
        steps_per_unit=args.steps,
        replicates=args.replicates,
        seed=args.seed,
        p=args.p,
        T=args.T,
    )
    entry = calibrate(args.kind, args.p, args.T, args.family, args.alpha, grid)
    path = _table_path(args.out)
    table = load_table(path) if path.exists() else CalibrationTable()
    table.put(args.kind, args.p, args.T, args.family, args.alpha, entry)
    save_table(table, path)
    print(
        f"kind={args.kind} p={args.p} T={args.T} family={args.family} "
        f"alpha={args.alpha}: c_alpha={entry.c_alpha:.6g} (se {entry.se:.2g}) -> {path}"
    )
    return 0


def _cmd_monitor(args) -> int:
    x = harness.read_numeric_csv(args.csv)
    functional = FunctionalKind.from_label(args.functional, x.shape[1])
    table = _load_table_arg(args.table)
    c_alpha = table.c_alpha(args.kind, functional.p, args.T, args.family, args.alpha)
    config = MonitorConfig(
        kind=args.kind,
        functional=functional,
        m=args.m,
        T=args.T,
        family=args.family,
        alpha=args.alpha,
        c_alpha=c_alpha,
    )
    report = run_monitor(config, x)
    payload = report.to_json_dict()
    payload["config"] = {
        "kind": args.kind,
        "functional": args.functional,
        "m": args.m,
        "T": args.T,
        "family": args.family,
        "alpha": args.alpha,
        "c_alpha": c_alpha,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    verdict = f"rejected at k={report.tau}" if report.rejected else "no rejection"
    print(f"{verdict} -> {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    spec = datagen.ModelSpec(
        model=args.model,
        mu=args.mu,
        delta=args.delta,
        c2=args.c2,
        change_index=args.change,
    )
    x = datagen.generate(spec, args.n, args.seed)
    header = ",".join(f"x{i + 1}" for i in range(x.shape[1]))
    lines = [header] + [",".join(repr(float(v)) for v in row) for row in x]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{args.n} rows of {args.model} -> {args.out}")
    return 0


def _cmd_study(args) -> int:
    spec = harness.StudySpec.from_toml(args.spec)
    table = _load_table_arg(args.table)
    rows = harness.run_study(spec, table)
    harness.write_study_tsv(rows, args.out)
    print(f"{len(rows)} study rows -> {args.out}")
    return 0


def _cmd_data(args) -> int:
    dates, values = harness.read_dated_csv(args.csv)
    if args.returns:
        values = harness.log_returns(values)
        dates = dates[1:]
    functional = FunctionalKind.from_label(args.functional, values.shape[1])
    table = _load_table_arg(args.table) if args.table else None
    detections = harness.run_data_workflow(
        dates,
        values,
        m=args.m,
        family=args.family,
        alpha=args.alpha,
        kind=DetectorKind(args.kind),
        functional=functional,
        table=table,
    )
    Path(args.out).write_text(json.dumps(detections, indent=2) + "\n", encoding="utf-8")
    print(f"{len(detections)} detections -> {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqmon", description="sequential change point monitoring toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in DetectorKind]
    families = [f.value for f in ThresholdFamily]

    cal = sub.add_parser("calibrate", help="Monte-Carlo threshold constant")
    cal.add_argument("--kind", required=True, choices=kinds)
    cal.add_argument("--p", required=True, type=int)
    cal.add_argument("--T", required=True, type=float)
    cal.add_argument("--family", required=True, choices=families)
    cal.add_argument("--alpha", required=True, type=float)
    cal.add_argument("--replicates", type=int, default=100_000)
    cal.add_argument("--steps", type=int, default=1000)
    cal.add_argument("--seed", type=int, default=42)
    cal.add_argument("--out", required=True, help="table file or directory")
    cal.set_defaults(func=_cmd_calibrate)

    mon = sub.add_parser("monitor", help="monitor a numeric CSV")
    mon.add_argument("--csv", required=True)
    mon.add_argument("--functional", required=True, help="mean|var|quantile:<beta>|corr")
    mon.add_argument("--m", required=True, type=int)
    mon.add_argument("--T", required=True, type=float)
    mon.add_argument("--kind", required=True, choices=kinds)
    mon.add_argument("--family", required=True, choices=families)
    mon.add_argument("--alpha", required=True, type=float)
    mon.add_argument("--table", default=None, help="table file or directory")
    mon.add_argument("--out", required=True, help="JSON report path")
    mon.set_defaults(func=_cmd_monitor)

    sim = sub.add_parser("simulate", help="draw from a simulation model")
    sim.add_argument("--model", required=True, choices=sorted(datagen._MODEL_DIM))
    sim.add_argument("--n", required=True, type=int)
    sim.add_argument("--mu", type=float, default=0.0)
    sim.add_argument("--delta", type=float, default=0.0)
    sim.add_argument("--c2", type=float, default=None)
    sim.add_argument("--change", type=int, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    stu = sub.add_parser("study", help="run a TOML-specified study")
    stu.add_argument("--spec", required=True)
    stu.add_argument("--table", default=None)
    stu.add_argument("--out", required=True, help="TSV output path")
    stu.set_defaults(func=_cmd_study)

    dat = sub.add_parser("data", help="restarting workflow on a dated CSV")
    dat.add_argument("--csv", required=True)
    dat.add_argument("--returns", action="store_true", help="convert prices to log-returns")
    dat.add_argument("--functional", default="var")
    dat.add_argument("--m", required=True, type=int)
    dat.add_argument("--kind", default="D", choices=kinds)
    dat.add_argument("--family", required=True, choices=families)
    dat.add_argument("--alpha", required=True, type=float)
    dat.add_argument("--table", default=None)
    dat.add_argument("--out", required=True, help="JSON detections path")
    dat.set_defaults(func=_cmd_data)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
