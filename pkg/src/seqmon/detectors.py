"""The five monitoring statistics and their building-block processes.

Kinds
-----
D    weighted two-sample comparison over every candidate split, normalized
     by the training long-run variance estimate
P    training estimate against every post-split window, same normalizer
Q    training estimate against the full post-training window (no maximum)
DSN  as D, but normalized split-wise by the self-normalizing matrix process
PSN  as P, but self-normalized

D, P and Q require an :class:`~seqmon.lrv.LrvEstimate`; the self-normalized
kinds require none.  Splits whose normalizer is numerically singular (or
whose windows are degenerate for the functional, which happens structurally
for the correlation on single-row windows) are excluded from the maxima and
counted; a step where every split is excluded has no defined value.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import _kernels as K
from . import functionals as fn
from .functionals import PrefixCache, estimate, validate_series
from .lrv import LrvEstimate

__all__ = [
    "DetectorKind",
    "DetectorUndefinedError",
    "SnNormalizer",
    "cusum_u",
    "detector_value",
    "sn_update",
    "spd_solve",
    "trajectories",
    "u_tilde",
]


class DetectorKind(str, Enum):
    D = "D"
    P = "P"
    Q = "Q"
    DSN = "DSN"
    PSN = "PSN"

    @property
    def self_normalized(self) -> bool:
        return self in (DetectorKind.DSN, DetectorKind.PSN)


class DetectorUndefinedError(RuntimeError):
    """Every candidate split at the requested step was skipped."""


def spd_solve(A, b) -> tuple[np.ndarray, bool]:
    """Solve the symmetric positive-definite system A x = b.

    Shared primitive for normalizer inversions: singularity means a
    non-positive Cholesky pivot or a squared pivot ratio below 1e-12.
    Returns (x, ok); x is meaningless when ok is False.
    """
    a = np.ascontiguousarray(A, dtype=np.float64)
    rhs = np.ascontiguousarray(b, dtype=np.float64)
    p = rhs.shape[0]
    x = np.empty(p)
    dummy = np.zeros(p)
    xd = np.empty(p)
    L = np.empty((p, p))
    ok = K._chol_solve2(a, L, rhs, x, dummy, xd)
    return x, bool(ok)


def _arrays(functional: fn.FunctionalKind, series, m: int):
    """Prefix arrays the kernels consume: (x, prefix_x, prefix_xx, center).

    Second-moment prefixes are built on rows shifted by the training mean
    (rows 1..m); the variance and correlation estimates are unchanged and
    the moment differences stay well conditioned.
    """
    x = validate_series(series)
    if x.shape[1] != functional.d:
        raise ValueError(
            f"functional expects d={functional.d}, series has d={x.shape[1]}"
        )
    if not 1 <= m <= x.shape[0]:
        raise ValueError(f"training size m={m} outside 1..{x.shape[0]}")
    n, d = x.shape
    prefx = np.zeros((n + 1, d))
    np.cumsum(x, axis=0, out=prefx[1:])
    if functional.code in (fn.VECH_VARIANCE, fn.CORRELATION):
        center = x[:m].mean(axis=0)
        xx = fn._vech_products(x - center)
        prefxx = np.zeros((n + 1, xx.shape[1]))
        np.cumsum(xx, axis=0, out=prefxx[1:])
    else:
        center = np.zeros(d)
        prefxx = np.zeros((1, 1))
    return x, prefx, prefxx, center


def u_tilde(
    functional: fn.FunctionalKind,
    series,
    l: int,
    z: int,
    u: int,
    cache: PrefixCache | None = None,
) -> np.ndarray:
    """Weighted difference of the estimates on rows l+1..z and z+1..u:
    (u - z)(z - l) (theta_hat_{l+1}^z - theta_hat_{z+1}^u).

    Exactly zero when z = l or u = z, in line with the convention that an
    estimator over an empty window is zero.
    """
    x = validate_series(series)
    n = x.shape[0]
    if not 0 <= l <= z <= u <= n:
        raise ValueError(f"need 0 <= l <= z <= u <= {n}, got ({l}, {z}, {u})")
    if z == l or u == z:
        return np.zeros(functional.p)
    w = float(u - z) * float(z - l)
    th1 = estimate(functional, x, l + 1, z, cache)
    th2 = estimate(functional, x, z + 1, u, cache)
    return w * (th1 - th2)


def cusum_u(
    functional: fn.FunctionalKind,
    series,
    z: int,
    u: int,
    cache: PrefixCache | None = None,
) -> np.ndarray:
    """The double-indexed CUSUM process, u_tilde anchored at the origin."""
    return u_tilde(functional, series, 0, z, u, cache)


class SnNormalizer:
    """Running representation of the self-normalizing matrix process.

    The first sum of the normalizer at split z depends on z alone and is
    cached per split; the second sum is recomputed per (split, step) pair
    from prefix sums.  Single-writer: one normalizer per monitored stream.
    """

    def __init__(self, functional: fn.FunctionalKind):
        self.functional = functional
        self._v1 = np.zeros((0, functional.p, functional.p))
        self._filled = 0
        self._m: int | None = None

    def _ensure(self, x, prefx, prefxx, m: int, k: int, center) -> None:
        if self._m is None:
            self._m = m
        elif self._m != m:
            raise ValueError("normalizer was built for a different training size")
        p = self.functional.p
        if self._v1.shape[0] < k:
            grown = np.zeros((k, p, p))
            grown[: self._filled] = self._v1[: self._filled]
            self._v1 = grown
        for j in range(self._filled, k):
            K.v1_row(
                self.functional.code,
                self.functional.beta,
                prefx,
                prefxx,
                x,
                m + j,
                self._v1[j],
                center,
            )
        self._filled = max(self._filled, k)

    def v_matrix(self, series, m: int, j: int, k: int) -> np.ndarray:
        """The normalizer matrix for split m+j at step k (rows 1..m+k)."""
        if not 0 <= j < k:
            raise ValueError("need 0 <= j < k")
        x, prefx, prefxx, center = _arrays(self.functional, series, m)
        self._ensure(x, prefx, prefxx, m, k, center)
        p = self.functional.p
        v2 = np.empty((p, p))
        K.v2_block(
            self.functional.code, self.functional.beta, prefx, prefxx, x,
            m + j, m + k, v2, center,
        )
        return self._v1[j] + v2


def sn_update(
    sn: SnNormalizer, series, functional: fn.FunctionalKind, m: int, k: int
) -> SnNormalizer:
    """Extend the normalizer cache so every split matrix at step k is
    available; returns the (mutated) normalizer."""
    if sn.functional != functional:
        raise ValueError("normalizer belongs to a different functional")
    x, prefx, prefxx, center = _arrays(functional, series, m)
    sn._ensure(x, prefx, prefxx, m, k, center)
    return sn


def detector_value(
    kind: DetectorKind,
    functional: fn.FunctionalKind,
    series,
    m: int,
    k: int,
    lrv: LrvEstimate | None = None,
    sn: SnNormalizer | None = None,
) -> float:
    """Value of the monitoring statistic at step k (rows 1..m+k).

    Raises DetectorUndefinedError when every candidate split was skipped.
    """
    kind = DetectorKind(kind)
    x, prefx, prefxx, center = _arrays(functional, series, m)
    n = x.shape[0]
    if not 1 <= k <= n - m:
        raise ValueError(f"step k={k} outside 1..{n - m}")
    if not kind.self_normalized:
        if lrv is None:
            raise ValueError(f"{kind.value} requires a long-run variance estimate")
        d_val, p_val, q_val, _, _ = K.nonsn_at_k(
            functional.code, functional.beta, prefx, prefxx, x, m, k,
            lrv.sigma_inv, center,
        )
        val = {DetectorKind.D: d_val, DetectorKind.P: p_val, DetectorKind.Q: q_val}[kind]
    else:
        if sn is None:
            sn = SnNormalizer(functional)
        sn._ensure(x, prefx, prefxx, m, k, center)
        d_val, p_val, _ = K.sn_at_k(
            functional.code, functional.beta, prefx, prefxx, x, m, k, sn._v1, center
        )
        val = d_val if kind is DetectorKind.DSN else p_val
    if np.isnan(val):
        raise DetectorUndefinedError(
            f"{kind.value} undefined at step {k}: every split was skipped"
        )
    return float(val)


def trajectories(
    functional: fn.FunctionalKind,
    series,
    m: int,
    Tm: int,
    kinds,
    lrv: LrvEstimate | None = None,
) -> tuple[dict, dict]:
    """Detector values at every step k = 1..Tm for the requested kinds.

    Returns (values, skipped): per kind a (Tm,) float array (NaN at steps
    where the statistic is undefined) and a (Tm,) int array of skipped
    splits.  Evaluating at step k only reads rows 1..m+k, so these match a
    streaming evaluation exactly.
    """
    kinds = [DetectorKind(kd) for kd in kinds]
    x, prefx, prefxx, center = _arrays(functional, series, m)
    if x.shape[0] < m + Tm:
        raise ValueError(f"series has {x.shape[0]} rows, need {m + Tm}")
    values = {kd: np.full(Tm, np.nan) for kd in kinds}
    skips = {kd: np.zeros(Tm, dtype=np.int64) for kd in kinds}

    non_sn = [kd for kd in kinds if not kd.self_normalized]
    if non_sn:
        if lrv is None:
            raise ValueError("D/P/Q require a long-run variance estimate")
        for k in range(1, Tm + 1):
            d_val, p_val, q_val, sk_d, sk_p = K.nonsn_at_k(
                functional.code, functional.beta, prefx, prefxx, x, m, k,
                lrv.sigma_inv, center,
            )
            for kd in non_sn:
                if kd is DetectorKind.D:
                    values[kd][k - 1] = d_val
                    skips[kd][k - 1] = sk_d
                elif kd is DetectorKind.P:
                    values[kd][k - 1] = p_val
                    skips[kd][k - 1] = sk_p
                else:
                    values[kd][k - 1] = q_val

    sn_kinds = [kd for kd in kinds if kd.self_normalized]
    if sn_kinds:
        sn = SnNormalizer(functional)
        for k in range(1, Tm + 1):
            sn._ensure(x, prefx, prefxx, m, k, center)
            d_val, p_val, sk = K.sn_at_k(
                functional.code, functional.beta, prefx, prefxx, x, m, k,
                sn._v1, center,
            )
            for kd in sn_kinds:
                values[kd][k - 1] = d_val if kd is DetectorKind.DSN else p_val
                skips[kd][k - 1] = sk
    return values, skips
