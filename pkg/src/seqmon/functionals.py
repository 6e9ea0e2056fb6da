"""Plug-in estimators over index windows of a multivariate sample.

Window bounds are 1-based and inclusive throughout the package: the window
``(i, j)`` covers rows ``i..j`` of the series.  This mirrors the estimator
notation used by the detectors, where every statistic is a function of
parameter estimates computed on contiguous row slices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MEAN",
    "VECH_VARIANCE",
    "QUANTILE",
    "CORRELATION",
    "FunctionalKind",
    "PrefixCache",
    "ReferenceParams",
    "DegenerateWindowError",
    "build_prefix_cache",
    "estimate",
    "influence",
    "validate_series",
    "vech",
]

# dispatch codes, shared with the compiled kernels in seqmon._kernels
MEAN = 0
VECH_VARIANCE = 1
QUANTILE = 2
CORRELATION = 3

_LABELS = {MEAN: "mean", VECH_VARIANCE: "var", QUANTILE: "quantile", CORRELATION: "corr"}


class DegenerateWindowError(ValueError):
    """A window that cannot support the requested functional, e.g. zero
    within-window variance in a column entering a correlation."""


def validate_series(series) -> np.ndarray:
    """Coerce to a C-contiguous float64 (n, d) array and check invariants:
    at least one row, every entry finite. 1-d input becomes a single column."""
    x = np.ascontiguousarray(series, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ValueError(f"series must be 1- or 2-dimensional, got shape {x.shape}")
    if x.shape[0] < 1:
        raise ValueError("series needs at least one row")
    if not np.isfinite(x).all():
        raise ValueError("series contains non-finite entries")
    return x


@dataclass(frozen=True)
class FunctionalKind:
    """A p-dimensional parameter of the d-dimensional marginal distribution.

    Output dimension: mean -> p = d, vech-variance -> p = d(d+1)/2,
    quantile -> p = 1 (needs d = 1), correlation -> p = 1 (needs d = 2).
    """

    code: int
    d: int
    beta: float = 0.0

    def __post_init__(self):
        if self.code not in _LABELS:
            raise ValueError(f"unknown functional code {self.code}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.code == QUANTILE:
            if self.d != 1:
                raise ValueError("the quantile functional needs univariate data")
            if not 0.0 < self.beta < 1.0:
                raise ValueError("quantile level must lie in (0, 1)")
        if self.code == CORRELATION and self.d != 2:
            raise ValueError("the correlation functional needs bivariate data")

    @classmethod
    def mean(cls, d: int) -> "FunctionalKind":
        return cls(MEAN, d)

    @classmethod
    def vech_variance(cls, d: int) -> "FunctionalKind":
        return cls(VECH_VARIANCE, d)

    @classmethod
    def quantile(cls, beta: float) -> "FunctionalKind":
        return cls(QUANTILE, 1, float(beta))

    @classmethod
    def correlation(cls) -> "FunctionalKind":
        return cls(CORRELATION, 2)

    @classmethod
    def from_label(cls, label: str, d: int) -> "FunctionalKind":
        """Parse 'mean' | 'var' | 'quantile:<beta>' | 'corr' for d-column data."""
        if label == "mean":
            return cls.mean(d)
        if label == "var":
            return cls.vech_variance(d)
        if label == "corr":
            return cls.correlation()
        if label.startswith("quantile"):
            _, _, tail = label.partition(":")
            if not tail:
                raise ValueError("quantile functional needs a level, e.g. quantile:0.5")
            return cls.quantile(float(tail))
        raise ValueError(f"unknown functional label {label!r}")

    @property
    def p(self) -> int:
        if self.code == MEAN:
            return self.d
        if self.code == VECH_VARIANCE:
            return self.d * (self.d + 1) // 2
        return 1

    @property
    def label(self) -> str:
        if self.code == QUANTILE:
            return f"quantile:{self.beta}"
        return _LABELS[self.code]


def vech(mat) -> np.ndarray:
    """Stack the upper triangle of a symmetric matrix column by column:
    positions (1,1), (1,2), (2,2), (1,3), (2,3), (3,3), ..."""
    m = np.asarray(mat, dtype=np.float64)
    d = m.shape[0]
    return np.concatenate([m[: c + 1, c] for c in range(d)])


def _vech_products(x: np.ndarray) -> np.ndarray:
    """Row-wise vech(x xT), one row per observation."""
    n, d = x.shape
    out = np.empty((n, d * (d + 1) // 2))
    pos = 0
    for cj in range(d):
        for ci in range(cj + 1):
            out[:, pos] = x[:, ci] * x[:, cj]
            pos += 1
    return out


@dataclass(frozen=True)
class PrefixCache:
    """Cumulative row sums for O(1) window moments.

    ``prefix_x[t]`` is the sum of rows 1..t (row 0 is zero).  For the
    variance and correlation functionals ``prefix_xx[t]`` additionally holds
    cumulative sums of the per-row vech products of rows shifted by
    ``center`` (the full-sample mean); shifting leaves both functionals
    unchanged and keeps window moment differences well conditioned.
    """

    prefix_x: np.ndarray
    prefix_xx: np.ndarray | None = None
    center: np.ndarray | None = None


def build_prefix_cache(series, kind: FunctionalKind) -> PrefixCache:
    x = validate_series(series)
    if kind.code == QUANTILE:
        raise ValueError(
            "quantile windows are evaluated by selection; no prefix structure exists"
        )
    n, d = x.shape
    prefix_x = np.zeros((n + 1, d))
    np.cumsum(x, axis=0, out=prefix_x[1:])
    if kind.code in (VECH_VARIANCE, CORRELATION):
        center = x.mean(axis=0)
        xx = _vech_products(x - center)
        prefix_xx = np.zeros((n + 1, xx.shape[1]))
        np.cumsum(xx, axis=0, out=prefix_xx[1:])
        return PrefixCache(prefix_x, prefix_xx, center)
    return PrefixCache(prefix_x)


def quantile_rank(beta: float, nw: int) -> int:
    """Smallest 1-based rank r with r/nw >= beta, i.e. the order statistic
    selected by the generalized inverse of the empirical distribution."""
    r = math.ceil(beta * nw)
    if r > 1 and (r - 1) / nw >= beta:
        r -= 1
    return min(max(r, 1), nw)


def _check_window(i: int, j: int, n: int) -> None:
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
        raise ValueError("window bounds must be integers")
    if not (1 <= i <= j <= n):
        raise ValueError(f"invalid window ({i}, {j}) for {n} rows")


def _corr_close(v1: float, v2: float, cov: float, nw: int) -> float:
    if nw == 1 or v1 <= 0.0 or v2 <= 0.0:
        raise DegenerateWindowError(
            "correlation window has zero variance in at least one column"
        )
    r2 = (cov * cov) / (v1 * v2)
    if r2 >= 1.0:
        return 1.0 if cov > 0 else -1.0
    return cov / math.sqrt(v1 * v2)


def estimate(
    kind: FunctionalKind,
    series,
    i: int,
    j: int,
    cache: PrefixCache | None = None,
) -> np.ndarray:
    """Plug-in estimate of the functional on the window rows i..j.

    The variance uses the population divisor (the exact plug-in of the
    empirical distribution), the quantile the left-continuous generalized
    inverse with no interpolation.  With a cache, moments come from prefix
    sums and agree with the direct evaluation to ~1e-12 relative.
    """
    x = validate_series(series)
    n, d = x.shape
    if d != kind.d:
        raise ValueError(f"functional expects d={kind.d}, series has d={d}")
    _check_window(i, j, n)
    nw = j - i + 1

    if kind.code == MEAN:
        if cache is not None:
            return (cache.prefix_x[j] - cache.prefix_x[i - 1]) / nw
        return x[i - 1 : j].mean(axis=0)

    if kind.code == VECH_VARIANCE:
        if cache is not None and cache.prefix_xx is not None:
            mu = (cache.prefix_x[j] - cache.prefix_x[i - 1]) / nw - cache.center
            m2 = (cache.prefix_xx[j] - cache.prefix_xx[i - 1]) / nw
            return m2 - vech(np.outer(mu, mu))
        w = x[i - 1 : j]
        wc = w - w.mean(axis=0)
        return vech((wc.T @ wc) / nw)

    if kind.code == QUANTILE:
        w = np.sort(x[i - 1 : j, 0])
        return np.array([w[quantile_rank(kind.beta, nw) - 1]])

    # correlation; tiny windows are evaluated directly even with a cache,
    # since near-zero variances amplify prefix-difference rounding
    if cache is not None and cache.prefix_xx is not None and nw > 4:
        mu1 = (cache.prefix_x[j, 0] - cache.prefix_x[i - 1, 0]) / nw - cache.center[0]
        mu2 = (cache.prefix_x[j, 1] - cache.prefix_x[i - 1, 1]) / nw - cache.center[1]
        v1 = (cache.prefix_xx[j, 0] - cache.prefix_xx[i - 1, 0]) / nw - mu1 * mu1
        cov = (cache.prefix_xx[j, 1] - cache.prefix_xx[i - 1, 1]) / nw - mu1 * mu2
        v2 = (cache.prefix_xx[j, 2] - cache.prefix_xx[i - 1, 2]) / nw - mu2 * mu2
    else:
        w = x[i - 1 : j]
        wc = w - w.mean(axis=0)
        v1 = wc[:, 0] @ wc[:, 0] / nw
        v2 = wc[:, 1] @ wc[:, 1] / nw
        cov = wc[:, 0] @ wc[:, 1] / nw
    return np.array([_corr_close(v1, v2, cov, nw)])


@dataclass(frozen=True)
class ReferenceParams:
    """Reference quantities of the stable distribution for influence()."""

    mu: np.ndarray | float | None = None
    variance: np.ndarray | float | None = None
    quantile: float | None = None
    density: float | None = None


def influence(kind: FunctionalKind, x, ref: ReferenceParams) -> np.ndarray:
    """First-order (Gateaux) derivative of the functional at the reference
    distribution, evaluated at a single observation.

    Only test oracles validating the linearization of the estimators call
    this; the detectors themselves never do.
    """
    if kind.code == MEAN:
        xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
        mu = np.broadcast_to(np.asarray(ref.mu, dtype=np.float64), xv.shape)
        return xv - mu
    if kind.code == VECH_VARIANCE:
        xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
        mu = np.broadcast_to(np.asarray(ref.mu, dtype=np.float64), xv.shape)
        v = np.atleast_2d(np.asarray(ref.variance, dtype=np.float64))
        xc = xv - mu
        return vech(np.outer(xc, xc) - v)
    if kind.code == QUANTILE:
        if ref.density is None or ref.density <= 0.0:
            raise ValueError("density at the quantile must be positive")
        val = float(np.asarray(x).reshape(()))
        return np.array([(kind.beta - (val <= ref.quantile)) / ref.density])
    raise ValueError("no influence function is housed for the correlation functional")
