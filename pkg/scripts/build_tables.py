#!/usr/bin/env python3
"""Build the shipped calibration table.

One pass per (p, T) tier simulates shared Brownian paths and calibrates
every requested kind, all three threshold families and the three standard
levels at once.  The long-run-variance-normalized kinds (D, P, Q) are cheap
and get more replicates than the self-normalized kinds at large p, where the
per-path cost grows like p^3; each table entry records the exact settings
that produced it.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from seqmon.calibration import CalibrationTable, calibrate_grid, save_table

ALPHAS = (0.01, 0.05, 0.10)
NSN = ("D", "P", "Q")
SN = ("DSN", "PSN")
ALL = NSN + SN

# (p, T, kinds, replicates, steps_per_unit)
FULL_PLAN = [
    # p = 1: the scalar fast path makes one all-kind pass cheap
    (1, 1.0, ALL, 100_000, 1000),
    (1, 2.0, ALL, 50_000, 500),
    (1, 3.0, ALL, 50_000, 400),
    (1, 4.92, ALL, 30_000, 250),
    # p = 2
    (2, 1.0, NSN, 50_000, 1000),
    (2, 1.0, SN, 10_000, 400),
    (2, 2.0, NSN, 25_000, 500),
    (2, 2.0, SN, 8_000, 250),
    (2, 3.0, NSN, 25_000, 400),
    (2, 3.0, SN, 8_000, 200),
    (2, 4.92, NSN, 20_000, 250),
    (2, 4.92, SN, 6_000, 150),
    # p = 3
    (3, 1.0, NSN, 50_000, 1000),
    (3, 1.0, SN, 10_000, 400),
    (3, 2.0, NSN, 25_000, 500),
    (3, 2.0, SN, 8_000, 250),
    (3, 3.0, NSN, 25_000, 400),
    (3, 3.0, SN, 8_000, 200),
    (3, 4.92, NSN, 20_000, 250),
    (3, 4.92, SN, 6_000, 150),
    # p = 6
    (6, 1.0, NSN, 25_000, 500),
    (6, 1.0, SN, 6_000, 250),
    (6, 2.0, NSN, 15_000, 300),
    (6, 2.0, SN, 5_000, 200),
    (6, 3.0, NSN, 15_000, 250),
    (6, 3.0, SN, 5_000, 150),
    (6, 4.92, NSN, 12_000, 200),
    (6, 4.92, SN, 4_000, 125),
]

QUICK_PLAN = [
    (1, 1.0, ALL, 2_000, 100),
    (3, 1.0, ALL, 1_000, 100),
]

BASE_SEED = 20240601


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(
            Path(__file__).resolve().parent.parent
            / "src/seqmon/tables/calibration.tsv"
        ),
    )
    parser.add_argument("--quick", action="store_true", help="tiny smoke settings")
    args = parser.parse_args()

    plan = QUICK_PLAN if args.quick else FULL_PLAN
    table = CalibrationTable()
    t_start = time.perf_counter()
    for idx, (p, T, kinds, reps, steps) in enumerate(plan):
        t0 = time.perf_counter()
        entries = calibrate_grid(
            kinds, p, T, ALPHAS, replicates=reps, steps_per_unit=steps,
            seed=BASE_SEED + idx,
        )
        table.merge(entries)
        print(
            f"[{idx + 1:2d}/{len(plan)}] p={p} T={T} kinds={','.join(kinds)} "
            f"reps={reps} steps={steps}: {time.perf_counter() - t0:6.1f}s",
            flush=True,
        )
    save_table(table, args.out)
    print(
        f"{len(table)} entries -> {args.out} "
        f"({time.perf_counter() - t_start:.0f}s total)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
