"""Long-run variance estimation from the stable training sample.

The detectors that are not self-normalized divide by an estimate of the
long-run variance matrix of the influence-function process of the monitored
functional.  Estimation uses only the first m rows (the training sample) and
a quadratic-spectral kernel weighting of the sample autocovariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import functionals as fn

__all__ = [
    "LrvEstimate",
    "NonInvertibleError",
    "qs_kernel",
    "qs_lrv",
    "default_bandwidth",
    "lrv_for_functional",
]

RCOND_FLOOR = 1e-12


class NonInvertibleError(np.linalg.LinAlgError):
    """The long-run variance estimate is numerically singular.  A singular
    estimate signals a degenerate functional/data pairing; monitoring must
    not silently continue with a pseudo-inverse."""


@dataclass(frozen=True)
class LrvEstimate:
    """Symmetric p x p long-run variance estimate with its inverse."""

    sigma: np.ndarray
    sigma_inv: np.ndarray
    bandwidth: float
    m: int


def qs_kernel(x) -> np.ndarray:
    """Quadratic spectral kernel, k(0) = 1.

    k(x) = 25/(12 pi^2 x^2) * (sin(6 pi x / 5)/(6 pi x / 5) - cos(6 pi x / 5))
    """
    xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.ones_like(xv)
    nz = np.abs(xv) >= 1e-6  # below this the quadratic Taylor term is < 2e-12
    a = 1.2 * np.pi * xv[nz]
    out[nz] = 25.0 / (12.0 * np.pi**2 * xv[nz] ** 2) * (np.sin(a) / a - np.cos(a))
    if np.ndim(x) == 0:
        return out[0]
    return out


def default_bandwidth(m: int) -> float:
    """Bandwidth rule b_m = log10(m) for the quadratic spectral kernel."""
    if m < 2:
        raise ValueError("need at least two observations")
    return math.log10(m)


def _invert(sigma: np.ndarray, bandwidth: float, m: int) -> LrvEstimate:
    evals = np.linalg.eigvalsh(sigma)
    hi = float(np.max(np.abs(evals)))
    lo = float(np.min(np.abs(evals)))
    if hi <= 0.0 or lo / hi < RCOND_FLOOR:
        raise NonInvertibleError(
            f"long-run variance estimate is singular (|eig| range [{lo:.3e}, {hi:.3e}])"
        )
    sigma_inv = np.linalg.inv(sigma)
    return LrvEstimate(sigma=sigma, sigma_inv=sigma_inv, bandwidth=bandwidth, m=m)


def qs_lrv(Z, bandwidth: float) -> LrvEstimate:
    """HAC estimate with quadratic spectral weights.

    ``Z`` holds one influence-proxy row per observation.  Autocovariances are
    computed from the demeaned rows with divisor n at every lag and each lag
    i >= 1 enters symmetrized as k(i/b) (gamma_i + gamma_i^T).
    """
    z = np.asarray(Z, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    n = z.shape[0]
    if n < 2:
        raise ValueError("need at least two rows")
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    zc = z - z.mean(axis=0)
    sigma = zc.T @ zc / n
    weights = qs_kernel(np.arange(1, n) / bandwidth)
    for lag in range(1, n):
        g = zc[lag:].T @ zc[: n - lag] / n
        sigma = sigma + weights[lag - 1] * (g + g.T)
    sigma = (sigma + sigma.T) / 2.0
    return _invert(sigma, bandwidth, n)


def _silverman_density_at(values: np.ndarray, point: float) -> float:
    """Gaussian-kernel density estimate at one point, Silverman bandwidth."""
    m = values.shape[0]
    sd = float(values.std())
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(s for s in (sd, iqr / 1.34) if s > 0) if (sd > 0 or iqr > 0) else 0.0
    if spread <= 0:
        raise NonInvertibleError("cannot estimate a density from constant data")
    h = 0.9 * spread * m ** (-0.2)
    u = (point - values) / h
    return float(np.exp(-0.5 * u * u).sum() / (m * h * math.sqrt(2.0 * math.pi)))


def influence_proxies(kind: fn.FunctionalKind, series, m: int) -> np.ndarray:
    """Plug-in influence rows Z_t on the training rows 1..m.

    mean: Z_t = x_t - xbar
    vech-variance: Z_t = vech((x_t - xbar)(x_t - xbar)^T) - Vhat
    quantile: Z_t = (beta - 1{x_t <= qhat}) / fhat(qhat), with fhat a
        Gaussian-kernel density estimate at qhat (Silverman bandwidth)
    correlation: classical influence rows of the Pearson correlation,
        Z_t = u_t v_t - (rho/2)(u_t^2 + v_t^2) for the standardized
        coordinates u, v (plug-in moments from rows 1..m)
    """
    x = fn.validate_series(series)
    if not 2 <= m <= x.shape[0]:
        raise ValueError(f"training size m={m} outside 2..{x.shape[0]}")
    xm = x[:m]
    if kind.d != x.shape[1]:
        raise ValueError(f"functional expects d={kind.d}, series has d={x.shape[1]}")

    if kind.code == fn.MEAN:
        return xm - xm.mean(axis=0)

    if kind.code == fn.VECH_VARIANCE:
        xc = xm - xm.mean(axis=0)
        rows = fn._vech_products(xc)
        return rows - rows.mean(axis=0)

    if kind.code == fn.QUANTILE:
        qhat = float(fn.estimate(kind, xm, 1, m)[0])
        fhat = _silverman_density_at(xm[:, 0], qhat)
        z = (kind.beta - (xm[:, 0] <= qhat).astype(np.float64)) / fhat
        return z.reshape(-1, 1)

    # correlation
    mu1 = xm[:, 0].mean()
    mu2 = xm[:, 1].mean()
    v1 = xm[:, 0] @ xm[:, 0] / m - mu1 * mu1
    v2 = xm[:, 1] @ xm[:, 1] / m - mu2 * mu2
    if v1 <= 0 or v2 <= 0:
        raise NonInvertibleError("training sample has a constant column")
    u = (xm[:, 0] - mu1) / math.sqrt(v1)
    v = (xm[:, 1] - mu2) / math.sqrt(v2)
    rho = float(u @ v / m)
    z = u * v - 0.5 * rho * (u * u + v * v)
    return z.reshape(-1, 1)


def lrv_for_functional(
    kind: fn.FunctionalKind, series, m: int, bandwidth: float | None = None
) -> LrvEstimate:
    """Long-run variance of the functional's influence process on rows 1..m,
    quadratic spectral weights with the default bandwidth log10(m)."""
    z = influence_proxies(kind, series, m)
    b = default_bandwidth(m) if bandwidth is None else bandwidth
    return qs_lrv(z, b)
