"""Experiment runner: Monte-Carlo level/power studies over a parameter grid,
and the restarting real-data workflow on dated CSV series.

Study replicates draw from independent streams keyed by
(seed, scenario index, replicate index), so results are identical for any
worker count or scheduling.  Every rejection rate carries a binomial
Monte-Carlo standard error; the conditional mean rejection time ignores runs
without a rejection and runs rejecting before the true change.
"""

from __future__ import annotations

import csv
import math
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import date

import numpy as np

from . import datagen
from .calibration import (
    CalibrationTable,
    LimitGrid,
    ThresholdFamily,
    calibrate,
    default_table,
)
from .detectors import DetectorKind, trajectories
from .functionals import FunctionalKind, validate_series
from .lrv import lrv_for_functional
from .monitor import MonitorConfig, run as run_monitor

__all__ = [
    "StudySpec",
    "run_study",
    "write_study_tsv",
    "run_data_workflow",
    "read_numeric_csv",
    "read_dated_csv",
    "log_returns",
]

STUDY_COLUMNS = (
    "model",
    "kind",
    "family",
    "m",
    "T",
    "param",
    "reject_rate",
    "mc_se",
    "mean_tau",
    "mean_runtime",
)


@dataclass(frozen=True)
class StudySpec:
    """Grid specification for a level/power study.

    ``params`` is the alternative parameter of the model class: the mean
    shift for M models, the variance inflation for V models (0 reproduces
    the null), and the post-change innovation correlation for C models
    (where the null value is the pre-change correlation 0.3).  The change
    occurs at row m + floor(change_frac * m).
    """

    models: tuple
    kinds: tuple
    families: tuple
    ms: tuple
    Ts: tuple
    params: tuple
    replicates: int
    seed: int
    alpha: float = 0.05
    functional: str = "mean"
    change_frac: float = 0.5
    workers: int = 1

    @classmethod
    def from_toml(cls, path) -> "StudySpec":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        sec = raw.get("study", raw)
        return cls(
            models=tuple(sec["models"]),
            kinds=tuple(sec["kinds"]),
            families=tuple(sec.get("families", ["T1"])),
            ms=tuple(sec["m"]),
            Ts=tuple(sec.get("T", [1.0])),
            params=tuple(sec.get("params", [0.0])),
            replicates=int(sec["replicates"]),
            seed=int(sec["seed"]),
            alpha=float(sec.get("alpha", 0.05)),
            functional=str(sec.get("functional", "mean")),
            change_frac=float(sec.get("change_frac", 0.5)),
            workers=int(sec.get("workers", 1)),
        )


def _alternative_spec(model: str, param: float, change_index: int) -> datagen.ModelSpec:
    if model.startswith("M"):
        return datagen.ModelSpec(model, mu=param, change_index=change_index)
    if model.startswith("V"):
        return datagen.ModelSpec(model, delta=param, change_index=change_index)
    return datagen.ModelSpec(model, c2=param, change_index=change_index)


def _is_null_param(model: str, param: float) -> bool:
    if model.startswith("C"):
        return param == datagen.PRE_CHANGE_CORRELATION
    return param == 0.0


def run_study(spec: StudySpec, table: CalibrationTable | None = None) -> list[dict]:
    """Run the grid; one output row per (model, kind, family, m, T, param).

    Raises KeyError when the calibration table misses a required key.
    """
    table = table if table is not None else default_table()
    functional_by_d: dict[int, FunctionalKind] = {}
    rows = []
    scenario_idx = 0
    for model in spec.models:
        d = datagen.ModelSpec(model).d
        functional = functional_by_d.setdefault(
            d, FunctionalKind.from_label(spec.functional, d)
        )
        p = functional.p
        for m in spec.ms:
            for T in spec.Ts:
                Tm = round(T * m)
                if abs(T * m - Tm) > 1e-9:
                    raise ValueError(f"T*m must be an integer, got T={T}, m={m}")
                change_row = m + math.floor(spec.change_frac * m)
                for family in spec.families:
                    # thresholds per kind share c_alpha lookups
                    c_by_kind = {
                        kd: table.c_alpha(kd, p, T, family, spec.alpha)
                        for kd in spec.kinds
                    }
                    fam = ThresholdFamily(family)
                    for param in spec.params:
                        model_spec = _alternative_spec(model, param, change_row)
                        results = _run_scenario(
                            model, spec, m, Tm, functional, model_spec,
                            fam, c_by_kind, scenario_idx,
                        )
                        scenario_idx += 1
                        for kd in spec.kinds:
                            rejected, taus, runtimes = results[kd]
                            rate = float(np.mean(rejected))
                            se = math.sqrt(rate * (1.0 - rate) / spec.replicates)
                            is_null = _is_null_param(model, param)
                            good = [
                                t
                                for r, t in zip(rejected, taus)
                                if r and (is_null or m + t >= change_row)
                            ]
                            rows.append(
                                {
                                    "model": model,
                                    "kind": kd,
                                    "family": family,
                                    "m": m,
                                    "T": T,
                                    "param": param,
                                    "reject_rate": rate,
                                    "mc_se": se,
                                    "mean_tau": float(np.mean(good)) if good else float("nan"),
                                    "mean_runtime": float(np.median(runtimes)),
                                }
                            )
    return rows


def _run_scenario(model, spec, m, Tm, functional, model_spec, fam, c_by_kind, scenario_idx):
    """Evaluate every requested kind on the same replicate series."""
    ks = np.arange(1, Tm + 1) / m
    thr_by_kind = {
        kd: np.array([fam.threshold(t, c_by_kind[kd]) for t in ks])
        for kd in spec.kinds
    }
    jobs = [
        (
            model,
            tuple(spec.kinds),
            m,
            Tm,
            functional,
            model_spec,
            [spec.seed, scenario_idx, rep],
            thr_by_kind,
        )
        for rep in range(spec.replicates)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            per_rep = list(pool.map(_scenario_replicate, jobs, chunksize=16))
    else:
        per_rep = [_scenario_replicate(j) for j in jobs]
    results = {}
    for kd in spec.kinds:
        rejected = [r[kd][0] for r in per_rep]
        taus = [r[kd][1] for r in per_rep]
        runtimes = [r[kd][2] for r in per_rep]
        results[kd] = (rejected, taus, runtimes)
    return results


def _scenario_replicate(args):
    (model, kinds, m, Tm, functional, spec, rep_seed, thr_by_kind) = args
    series = datagen.generate(spec, m + Tm, rep_seed)
    kinds_enum = [DetectorKind(kd) for kd in kinds]
    non_sn = [kd for kd in kinds_enum if not kd.self_normalized]
    sn = [kd for kd in kinds_enum if kd.self_normalized]
    lrv = lrv_for_functional(functional, series, m) if non_sn else None
    out = {}
    for group in ([non_sn] if non_sn else []) + ([sn] if sn else []):
        t0 = time.perf_counter()
        values, _ = trajectories(functional, series, m, Tm, group, lrv=lrv)
        elapsed = (time.perf_counter() - t0) / len(group)
        for kd in group:
            vals = values[kd]
            thr = thr_by_kind[kd.value]
            crossed = np.flatnonzero(~np.isnan(vals) & (vals > thr))
            tau = int(crossed[0]) + 1 if crossed.size else None
            out[kd.value] = (tau is not None, tau, elapsed)
    return out


def write_study_tsv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(STUDY_COLUMNS)
        for row in rows:
            writer.writerow([row[c] for c in STUDY_COLUMNS])


# ---------------------------------------------------------------------------
# CSV ingestion and the restarting data workflow
# ---------------------------------------------------------------------------


def read_numeric_csv(path) -> np.ndarray:
    """Comma-separated numeric columns with a header row."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"empty CSV: {path}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return np.asarray(rows, dtype=np.float64)


def read_dated_csv(path) -> tuple[list[date], np.ndarray]:
    """First column ISO dates (strictly increasing), remaining columns numeric."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"empty CSV: {path}")
        dates: list[date] = []
        rows = []
        for row in reader:
            if not row:
                continue
            try:
                dates.append(date.fromisoformat(row[0].strip()))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"malformed CSV row {row!r} in {path}") from exc
    if not rows:
        raise ValueError(f"no data rows in {path}")
    for a, b in zip(dates, dates[1:]):
        if b <= a:
            raise ValueError(f"dates are not strictly increasing near {b}")
    return dates, np.asarray(rows, dtype=np.float64)


def log_returns(prices: np.ndarray) -> np.ndarray:
    """ln(p_t / p_{t-1}) per column; output has one row fewer."""
    p = validate_series(prices)
    if p.shape[0] < 2:
        raise ValueError("need at least two price rows")
    if (p <= 0).any():
        raise ValueError("prices must be positive for log-returns")
    return np.diff(np.log(p), axis=0)


def _on_demand_c_alpha(kind, p, T, family, alpha, replicates, steps):
    seed_key = [405060708, p, round(T * 1e6), list(ThresholdFamily).index(family)]
    grid = LimitGrid(
        steps_per_unit=steps,
        replicates=replicates,
        seed=int(np.random.SeedSequence(seed_key).generate_state(1)[0]),
        p=p,
        T=float(T),
    )
    return calibrate(kind, p, T, family, alpha, grid).c_alpha


def run_data_workflow(
    dates: list[date],
    series,
    m: int,
    family: ThresholdFamily,
    alpha: float,
    kind: DetectorKind = DetectorKind.D,
    functional: FunctionalKind | None = None,
    table: CalibrationTable | None = None,
    stability_check=None,
    calib_replicates: int = 20000,
    calib_steps: int = 200,
) -> list[dict]:
    """Sequential monitoring with restarts on a dated series.

    Each round trains on m rows, monitors to the end of the data, and on a
    rejection reports the rejection date and the location-estimate date,
    then restarts with the m rows following the estimated location as the
    new training set.  ``stability_check`` is a hook called on each training
    block; it returns None when the block is acceptable or a 1-based row
    index within the block to re-anchor past (the default accepts always).
    Missing calibration keys are filled by a deterministic on-demand
    Monte-Carlo run at (calib_replicates, calib_steps).
    """
    x = validate_series(series)
    n = x.shape[0]
    if len(dates) != n:
        raise ValueError("dates and series length differ")
    if functional is None:
        functional = (
            FunctionalKind.vech_variance(x.shape[1])
            if x.shape[1] > 1
            else FunctionalKind.vech_variance(1)
        )
    kind = DetectorKind(kind)
    family = ThresholdFamily(family)
    p = functional.p
    detections = []
    start = 0
    while n - start >= m + 1:
        training = x[start : start + m]
        if stability_check is not None:
            anchor = stability_check(training)
            if anchor is not None:
                start += int(anchor)
                continue
        Tm = n - start - m
        T = Tm / m
        try:
            c_alpha = (table or default_table()).c_alpha(kind, p, T, family, alpha)
        except KeyError:
            c_alpha = _on_demand_c_alpha(
                kind, p, T, family, alpha, calib_replicates, calib_steps
            )
        config = MonitorConfig(
            kind=kind, functional=functional, m=m, T=T,
            family=family, alpha=alpha, c_alpha=c_alpha,
        )
        report = run_monitor(config, x[start : start + m + Tm])
        if not report.rejected:
            break
        rej_row = start + m + report.tau  # 1-based absolute row
        loc_row = start + report.location
        detections.append(
            {
                "rejection_index": rej_row,
                "rejection_date": dates[rej_row - 1].isoformat(),
                "location_index": loc_row,
                "location_date": dates[loc_row - 1].isoformat(),
            }
        )
        start = loc_row
    return detections
