"""Monte-Carlo calibration of threshold constants.

Under no change, each normalized monitoring scheme converges to the supremum
of a functional of a p-dimensional Brownian motion over the triangle
1 <= s <= t <= T+1, divided by the threshold shape at t - 1.  The constant
c_alpha is the empirical upper alpha-quantile of simulated suprema computed
with the shape normalized to c = 1, so that crossing c_alpha is equivalent
to crossing the threshold function itself.

Brownian motion is discretized as scaled partial sums of i.i.d. standard
normal increments on a uniform grid of [0, T+1]; the self-normalizing
integrals are left-Riemann sums on the same grid.  Each replicate draws from
an independent stream keyed by (seed, replicate index), so results do not
depend on batching or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import _kernels as K
from .detectors import DetectorKind

__all__ = [
    "CalibrationEntry",
    "CalibrationTable",
    "LimitGrid",
    "TableFormatError",
    "ThresholdFamily",
    "calibrate",
    "calibrate_grid",
    "default_table",
    "load_table",
    "save_table",
    "simulate_brownian",
    "simulate_limit_path",
]

_KIND_INDEX = {
    DetectorKind.D: 0,
    DetectorKind.P: 1,
    DetectorKind.Q: 2,
    DetectorKind.DSN: 3,
    DetectorKind.PSN: 4,
}

_FAMILY_DELTA = 1e-10


class ThresholdFamily(str, Enum):
    """The three threshold shapes; the calibrated constant multiplies them."""

    T1 = "T1"
    T2 = "T2"
    T3 = "T3"

    def shape(self, t: float) -> float:
        if self is ThresholdFamily.T1:
            return 1.0
        g = (t + 1.0) ** 2
        if self is ThresholdFamily.T2:
            return g
        root = math.sqrt(t / (t + 1.0)) if t > 0 else 0.0
        return g * max(root, _FAMILY_DELTA)

    def threshold(self, t: float, c_alpha: float) -> float:
        return c_alpha * self.shape(t)


@dataclass(frozen=True)
class LimitGrid:
    """Discretization and replication settings for the limit simulation."""

    steps_per_unit: int
    replicates: int
    seed: int
    p: int
    T: float

    def __post_init__(self):
        if self.steps_per_unit < 1 or self.replicates < 1 or self.p < 1:
            raise ValueError("grid settings must be positive")
        if self.T < 0:
            raise ValueError("horizon factor must be nonnegative")

    @property
    def n_points(self) -> int:
        # never overshoot the horizon when steps*(T+1) is not integral
        return math.floor(self.steps_per_unit * (self.T + 1.0) + 1e-9) + 1


def _grid_arrays(grid: LimitGrid):
    steps = grid.steps_per_unit
    n = grid.n_points
    i1 = steps  # index of time 1
    dt = 1.0 / steps
    rvals = np.arange(n, dtype=np.float64) / steps
    cumr1 = np.zeros(n + 1)
    cumr1[1:] = np.cumsum(rvals) * dt
    cumr2 = np.zeros(n + 1)
    cumr2[1:] = np.cumsum(rvals * rvals) * dt
    nt = n - i1
    tau = np.arange(nt, dtype=np.float64) / steps
    w0 = np.empty((nt, 3))
    for fi, fam in enumerate(ThresholdFamily):
        w0[:, fi] = [fam.shape(t) for t in tau]
    return rvals, i1, dt, cumr1, cumr2, w0


def simulate_brownian(grid: LimitGrid, rng: np.random.Generator) -> np.ndarray:
    """One p-dimensional Brownian path on the grid of [0, T+1], W(0) = 0."""
    n = grid.n_points
    dt = 1.0 / grid.steps_per_unit
    incs = rng.standard_normal((n - 1, grid.p)) * math.sqrt(dt)
    w = np.zeros((n, grid.p))
    np.cumsum(incs, axis=0, out=w[1:])
    return w


def _want_mask(kinds) -> np.ndarray:
    mask = np.zeros(5, dtype=np.bool_)
    for kd in kinds:
        mask[_KIND_INDEX[DetectorKind(kd)]] = True
    return mask


def simulate_limit_path(
    kind: DetectorKind,
    grid: LimitGrid,
    rng: np.random.Generator,
    family: ThresholdFamily = ThresholdFamily.T1,
) -> float:
    """One replicate of the limit supremum for the given kind and family
    (threshold shape normalized to c = 1)."""
    kind = DetectorKind(kind)
    if grid.n_points - 1 < grid.steps_per_unit:
        return 0.0  # no monitoring window beyond time 1
    rvals, i1, dt, cumr1, cumr2, w0 = _grid_arrays(grid)
    incs = rng.standard_normal((1, grid.n_points - 1, grid.p))
    out = K.limit_sups_batch(incs, rvals, i1, _want_mask([kind]), w0, cumr1, cumr2, dt)
    fam_idx = list(ThresholdFamily).index(ThresholdFamily(family))
    return float(out[0, _KIND_INDEX[kind], fam_idx])


def _simulate_sups(kinds, grid: LimitGrid, batch: int = 256) -> np.ndarray:
    """(replicates, 5, 3) supremum draws with per-replicate streams."""
    rvals, i1, dt, cumr1, cumr2, w0 = _grid_arrays(grid)
    want = _want_mask(kinds)
    n = grid.n_points
    reps = grid.replicates
    out = np.empty((reps, 5, 3))
    for start in range(0, reps, batch):
        stop = min(start + batch, reps)
        incs = np.empty((stop - start, n - 1, grid.p))
        for idx in range(start, stop):
            rng = np.random.default_rng([grid.seed, idx])
            incs[idx - start] = rng.standard_normal((n - 1, grid.p))
        out[start:stop] = K.limit_sups_batch(
            incs, rvals, i1, want, w0, cumr1, cumr2, dt
        )
    return out


def _upper_quantile(sorted_vals: np.ndarray, alpha: float) -> float:
    n = sorted_vals.shape[0]
    if alpha >= 1.0:
        return 0.0
    k0 = math.ceil((1.0 - alpha) * n)
    return float(sorted_vals[max(k0, 1) - 1])


def _quantile_se(sorted_vals: np.ndarray, alpha: float) -> float:
    """Binomial-approximation standard error of the empirical quantile,
    with the density at the quantile read off neighbouring order stats."""
    n = sorted_vals.shape[0]
    if alpha >= 1.0 or n < 4:
        return 0.0
    k0 = math.ceil((1.0 - alpha) * n) - 1
    h = max(1, round(0.5 * math.sqrt(n)))
    lo = max(0, k0 - h)
    hi = min(n - 1, k0 + h)
    span = float(sorted_vals[hi] - sorted_vals[lo])
    if span <= 0:
        return 0.0
    dens = ((hi - lo) / n) / span
    return math.sqrt(alpha * (1.0 - alpha) / n) / dens


@dataclass(frozen=True)
class CalibrationEntry:
    """One calibrated constant plus the Monte-Carlo settings that made it."""

    c_alpha: float
    se: float
    replicates: int
    steps_per_unit: int
    seed: int


def calibrate(
    kind: DetectorKind,
    p: int,
    T: float,
    family: ThresholdFamily,
    alpha: float,
    grid: LimitGrid,
) -> CalibrationEntry:
    """Monte-Carlo constant c_alpha: the empirical (1-alpha)-quantile of the
    replicate suprema under the shape-normalized threshold."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    grid = replace(grid, p=p, T=float(T))
    kind = DetectorKind(kind)
    fam_idx = list(ThresholdFamily).index(ThresholdFamily(family))
    sups = _simulate_sups([kind], grid)[:, _KIND_INDEX[kind], fam_idx]
    xs = np.sort(sups)
    return CalibrationEntry(
        c_alpha=_upper_quantile(xs, alpha),
        se=_quantile_se(xs, alpha),
        replicates=grid.replicates,
        steps_per_unit=grid.steps_per_unit,
        seed=grid.seed,
    )


def calibrate_grid(
    kinds,
    p: int,
    T: float,
    alphas,
    replicates: int,
    steps_per_unit: int,
    seed: int,
) -> dict:
    """Calibrate several kinds, all three families and several levels from
    one shared set of simulated paths.  Returns {key: CalibrationEntry}."""
    grid = LimitGrid(steps_per_unit, replicates, seed, p, float(T))
    kinds = [DetectorKind(kd) for kd in kinds]
    sups = _simulate_sups(kinds, grid)
    entries = {}
    for kd in kinds:
        for fi, fam in enumerate(ThresholdFamily):
            xs = np.sort(sups[:, _KIND_INDEX[kd], fi])
            for alpha in alphas:
                key = CalibrationTable.key(kd.value, p, T, fam.value, alpha)
                entries[key] = CalibrationEntry(
                    c_alpha=_upper_quantile(xs, alpha),
                    se=_quantile_se(xs, alpha),
                    replicates=replicates,
                    steps_per_unit=steps_per_unit,
                    seed=seed,
                )
    return entries


# ---------------------------------------------------------------------------
# table persistence
# ---------------------------------------------------------------------------

_MAGIC = "#%seqmon-calibration-table 1"
_COLUMNS = (
    "kind",
    "p",
    "T",
    "family",
    "alpha",
    "c_alpha",
    "se",
    "replicates",
    "steps_per_unit",
    "seed",
)


class TableFormatError(ValueError):
    """Unrecognized magic header or corrupt record in a table file."""


class CalibrationTable:
    """Map (kind, p, T, family, alpha) -> calibrated constant."""

    def __init__(self, entries: dict | None = None):
        self.entries = dict(entries or {})

    @staticmethod
    def key(kind, p, T, family, alpha):
        return (
            DetectorKind(kind).value,
            int(p),
            round(float(T), 9),
            ThresholdFamily(family).value,
            round(float(alpha), 9),
        )

    def put(self, kind, p, T, family, alpha, entry: CalibrationEntry) -> None:
        self.entries[self.key(kind, p, T, family, alpha)] = entry

    def lookup(self, kind, p, T, family, alpha) -> CalibrationEntry:
        key = self.key(kind, p, T, family, alpha)
        try:
            return self.entries[key]
        except KeyError:
            raise KeyError(
                f"no calibration entry for kind={key[0]} p={key[1]} T={key[2]} "
                f"family={key[3]} alpha={key[4]}"
            ) from None

    def c_alpha(self, kind, p, T, family, alpha) -> float:
        return self.lookup(kind, p, T, family, alpha).c_alpha

    def merge(self, entries: dict) -> None:
        self.entries.update(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, CalibrationTable) and self.entries == other.entries


def save_table(table: CalibrationTable, path) -> None:
    lines = [_MAGIC, "\t".join(_COLUMNS)]
    for key in sorted(table.entries):
        kind, p, T, family, alpha = key
        e = table.entries[key]
        lines.append(
            "\t".join(
                (
                    kind,
                    str(p),
                    repr(T),
                    family,
                    repr(alpha),
                    repr(e.c_alpha),
                    repr(e.se),
                    str(e.replicates),
                    str(e.steps_per_unit),
                    str(e.seed),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_table(path) -> CalibrationTable:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise TableFormatError(f"not a seqmon calibration table: {path}")
    if len(lines) < 2 or lines[1].split("\t") != list(_COLUMNS):
        raise TableFormatError(f"unexpected column header in {path}")
    table = CalibrationTable()
    for ln in lines[2:]:
        if not ln.strip():
            continue
        parts = ln.split("\t")
        if len(parts) != len(_COLUMNS):
            raise TableFormatError(f"corrupt record in {path}: {ln!r}")
        kind, p, T, family, alpha, c_alpha, se, reps, steps, seed = parts
        table.put(
            kind,
            int(p),
            float(T),
            family,
            float(alpha),
            CalibrationEntry(
                c_alpha=float(c_alpha),
                se=float(se),
                replicates=int(reps),
                steps_per_unit=int(steps),
                seed=int(seed),
            ),
        )
    return table


_DEFAULT_TABLE: CalibrationTable | None = None


def default_table() -> CalibrationTable:
    """The calibration table shipped with the package."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        from importlib import resources

        with resources.as_file(
            resources.files("seqmon").joinpath("tables/calibration.tsv")
        ) as fp:
            _DEFAULT_TABLE = load_table(fp)
    return _DEFAULT_TABLE
