#!/usr/bin/env python3
"""Type-I error study: all five schemes on the four univariate models.

Reproduces the level-table layout (models x statistics at two training
sizes, constant threshold, nominal level 5%).  Writes one TSV row per cell;
the mean_runtime column holds the per-replicate median wall clock.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from seqmon.harness import StudySpec, run_study, write_study_tsv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=5000)
    parser.add_argument("--models", nargs="+", default=["M1", "M2", "M3", "M4"])
    parser.add_argument("--m", nargs="+", type=int, default=[50, 100])
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="level_study.tsv")
    args = parser.parse_args()

    spec = StudySpec(
        models=tuple(args.models),
        kinds=("D", "P", "Q", "DSN", "PSN"),
        families=("T1",),
        ms=tuple(args.m),
        Ts=(1.0,),
        params=(0.0,),
        replicates=args.replicates,
        seed=args.seed,
        workers=args.workers,
    )
    rows = run_study(spec)
    write_study_tsv(rows, args.out)
    print(f"{'model':<6}{'m':>5}  " + "".join(f"{k:>8}" for k in spec.kinds))
    for model in args.models:
        for m in args.m:
            cells = {
                r["kind"]: r["reject_rate"]
                for r in rows
                if r["model"] == model and r["m"] == m
            }
            line = "".join(f"{100 * cells[k]:>7.1f}%" for k in spec.kinds)
            print(f"{model:<6}{m:>5}  {line}")
    print(f"-> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
