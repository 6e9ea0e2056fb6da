"""Closed-end monitoring loop: consume observations one at a time, evaluate
the chosen statistic against the threshold w_alpha(k/m), stop on the first
strict exceedance, report the stopping time and a change location estimate.

Monitoring runs for at most Tm steps past the m training rows; a step whose
statistic is undefined (every candidate split skipped) never triggers a
rejection and is flagged in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as K
from . import functionals as fn
from .calibration import ThresholdFamily
from .detectors import DetectorKind
from .lrv import LrvEstimate, lrv_for_functional

__all__ = [
    "MonitorConfig",
    "MonitorReport",
    "MonitorState",
    "StepStatus",
    "locate",
    "run",
]


class StepStatus(Enum):
    CONTINUE = "continue"
    REJECTED = "rejected"
    HORIZON_REACHED = "horizon_reached"


@dataclass(frozen=True)
class MonitorConfig:
    kind: DetectorKind
    functional: fn.FunctionalKind
    m: int
    T: float
    family: ThresholdFamily
    alpha: float
    c_alpha: float

    def __post_init__(self):
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        object.__setattr__(self, "family", ThresholdFamily(self.family))
        if self.m < 2:
            raise ValueError("training size m must be at least 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        tm = self.T * self.m
        if abs(tm - round(tm)) > 1e-9 or round(tm) < 1:
            raise ValueError(
                f"T*m must be a positive integer, got T={self.T}, m={self.m}"
            )

    @property
    def horizon(self) -> int:
        return round(self.T * self.m)

    def threshold(self, k: int) -> float:
        return self.family.threshold(k / self.m, self.c_alpha)


@dataclass(frozen=True)
class MonitorReport:
    """Outcome of one monitored stream.

    ``tau`` is the stopping step (None when the horizon was reached without
    a rejection), ``location`` the change location estimate (present iff
    rejected).  ``trajectory`` and ``thresholds`` cover steps 1..k_stop; NaN
    trajectory values mark undefined steps, whose count per step is in
    ``skipped``/``undefined``.
    """

    rejected: bool
    tau: int | None
    location: int | None
    trajectory: np.ndarray
    thresholds: np.ndarray
    skipped: np.ndarray
    undefined: np.ndarray

    def to_json_dict(self) -> dict:
        traj = [
            {
                "k": i + 1,
                "value": None if np.isnan(v) else float(v),
                "threshold": float(t),
            }
            for i, (v, t) in enumerate(zip(self.trajectory, self.thresholds))
        ]
        return {
            "rejected": bool(self.rejected),
            "tau": None if self.tau is None else int(self.tau),
            "location": None if self.location is None else int(self.location),
            "trajectory": traj,
            "diagnostics": {
                "skipped": [int(s) for s in self.skipped],
                "undefined_steps": [int(i + 1) for i, u in enumerate(self.undefined) if u],
            },
        }


class MonitorState:
    """Mutable per-stream state; single-writer."""

    def __init__(
        self, config: MonitorConfig, training, lrv: LrvEstimate | None = None
    ):
        self.config = config
        x = fn.validate_series(training)
        m = config.m
        if x.shape[0] != m:
            raise ValueError(f"expected exactly m={m} training rows, got {x.shape[0]}")
        if x.shape[1] != config.functional.d:
            raise ValueError(
                f"functional expects d={config.functional.d}, data has d={x.shape[1]}"
            )
        if config.kind.self_normalized:
            self.lrv = None
        else:
            self.lrv = lrv if lrv is not None else lrv_for_functional(
                config.functional, x, m
            )
        n_max = m + config.horizon
        d = x.shape[1]
        self._data = np.zeros((n_max, d))
        self._data[:m] = x
        self._prefx = np.zeros((n_max + 1, d))
        np.cumsum(x, axis=0, out=self._prefx[1 : m + 1])
        code = config.functional.code
        if code in (fn.VECH_VARIANCE, fn.CORRELATION):
            # second-moment prefixes are centered at the training mean to
            # keep window moment differences well conditioned
            self._center = x.mean(axis=0)
            xx = fn._vech_products(x - self._center)
            self._prefxx = np.zeros((n_max + 1, xx.shape[1]))
            np.cumsum(xx, axis=0, out=self._prefxx[1 : m + 1])
        else:
            self._center = np.zeros(d)
            self._prefxx = np.zeros((1, 1))
        p = config.functional.p
        self._v1 = (
            np.zeros((config.horizon, p, p)) if config.kind.self_normalized else None
        )
        self.k = 0
        self.status = StepStatus.CONTINUE
        self.tau: int | None = None
        self.trajectory: list[float] = []
        self.thresholds: list[float] = []
        self.skipped: list[int] = []
        self.undefined: list[bool] = []

    def _append_row(self, x_row: np.ndarray) -> None:
        cfg = self.config
        t = cfg.m + self.k  # 1-based index of the new row
        self._data[t - 1] = x_row
        self._prefx[t] = self._prefx[t - 1] + x_row
        if cfg.functional.code in (fn.VECH_VARIANCE, fn.CORRELATION):
            d = x_row.shape[0]
            centered = x_row - self._center
            pos = 0
            for cj in range(d):
                for ci in range(cj + 1):
                    self._prefxx[t, pos] = (
                        self._prefxx[t - 1, pos] + centered[ci] * centered[cj]
                    )
                    pos += 1

    def _value_at_current_k(self) -> tuple[float, int]:
        cfg = self.config
        f = cfg.functional
        k = self.k
        if not cfg.kind.self_normalized:
            d_val, p_val, q_val, sk_d, sk_p = K.nonsn_at_k(
                f.code, f.beta, self._prefx, self._prefxx, self._data,
                cfg.m, k, self.lrv.sigma_inv, self._center,
            )
            if cfg.kind is DetectorKind.D:
                return d_val, sk_d
            if cfg.kind is DetectorKind.P:
                return p_val, sk_p
            return q_val, sk_p
        # fill the new split row of the normalizer cache, then evaluate
        K.v1_row(
            f.code, f.beta, self._prefx, self._prefxx, self._data,
            cfg.m + k - 1, self._v1[k - 1], self._center,
        )
        d_val, p_val, sk = K.sn_at_k(
            f.code, f.beta, self._prefx, self._prefxx, self._data,
            cfg.m, k, self._v1, self._center,
        )
        return (d_val if cfg.kind is DetectorKind.DSN else p_val), sk

    def step(self, x) -> StepStatus:
        """Consume one observation and evaluate the statistic.

        Rejection requires a strict exceedance of the threshold; an
        undefined statistic (NaN) never rejects.
        """
        if self.status is not StepStatus.CONTINUE:
            raise RuntimeError("monitoring has already stopped")
        cfg = self.config
        x_row = np.asarray(x, dtype=np.float64).reshape(-1)
        if x_row.shape[0] != cfg.functional.d:
            raise ValueError(f"expected a {cfg.functional.d}-vector")
        if not np.isfinite(x_row).all():
            raise ValueError("observation contains non-finite entries")
        self.k += 1
        self._append_row(x_row)
        value, sk = self._value_at_current_k()
        thr = cfg.threshold(self.k)
        self.trajectory.append(float(value))
        self.thresholds.append(thr)
        self.skipped.append(int(sk))
        self.undefined.append(bool(np.isnan(value)))
        if not np.isnan(value) and value > thr:
            self.status = StepStatus.REJECTED
            self.tau = self.k
        elif self.k >= cfg.horizon:
            self.status = StepStatus.HORIZON_REACHED
        return self.status

    def report(self) -> MonitorReport:
        rejected = self.status is StepStatus.REJECTED
        return MonitorReport(
            rejected=rejected,
            tau=self.tau if rejected else None,
            location=locate(self) if rejected else None,
            trajectory=np.asarray(self.trajectory),
            thresholds=np.asarray(self.thresholds),
            skipped=np.asarray(self.skipped, dtype=np.int64),
            undefined=np.asarray(self.undefined, dtype=bool),
        )


def locate(state: MonitorState) -> int:
    """Change location estimate after a rejection at step k: m plus the
    split index attaining the weighted two-sample objective, normalized by
    the long-run variance estimate (D/P/Q) or by the self-normalizer
    (DSN/PSN).  Ties break to the smallest split."""
    if state.tau is None:
        raise RuntimeError("no rejection to locate")
    cfg = state.config
    f = cfg.functional
    if not cfg.kind.self_normalized:
        j = K.nonsn_locate(
            f.code, f.beta, state._prefx, state._prefxx, state._data,
            cfg.m, state.tau, state.lrv.sigma_inv, state._center,
        )
    else:
        j = K.sn_locate(
            f.code, f.beta, state._prefx, state._prefxx, state._data,
            cfg.m, state.tau, state._v1, state._center,
        )
    if j < 0:  # every split skipped; the earliest candidate is the fallback
        j = 0
    return cfg.m + int(j)


def run(config: MonitorConfig, series, lrv: LrvEstimate | None = None) -> MonitorReport:
    """Run the full loop over a series holding the training rows followed by
    up to Tm monitoring rows.  Deterministic in (config, series)."""
    x = fn.validate_series(series)
    m = config.m
    if x.shape[0] < m:
        raise ValueError(f"series has {x.shape[0]} rows, need at least m={m}")
    state = MonitorState(config, x[:m], lrv=lrv)
    n_use = min(x.shape[0], m + config.horizon)
    for t in range(m, n_use):
        if state.step(x[t]) is not StepStatus.CONTINUE:
            break
    if state.status is StepStatus.CONTINUE and state.k < config.horizon:
        raise ValueError(
            f"series ended after {state.k} monitoring rows, horizon is {config.horizon}"
        )
    return state.report()
