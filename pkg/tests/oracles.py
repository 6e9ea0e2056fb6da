"""From-definition reference implementations used as test oracles.

Everything here evaluates the literal formulas on fresh window slices with
no incremental state, independent of the package's compiled evaluation
paths.  The one shared primitive is the symmetric-solve helper, because the
numerical singularity cutoff is part of the detectors' contract and both
sides must apply the same rule.
"""

import math

import numpy as np

from seqmon.detectors import DetectorKind, spd_solve
from seqmon.functionals import DegenerateWindowError, estimate, quantile_rank


def theta(functional, x, a, b):
    """Window estimate, or None when the window is degenerate."""
    try:
        return estimate(functional, x, a, b)
    except DegenerateWindowError:
        return None


def mean_bruteforce(x, a, b):
    w = x[a - 1 : b]
    return np.array([sum(col) / len(col) for col in w.T])


def vech_variance_bruteforce(x, a, b):
    """Direct double loop over rows and coordinate pairs."""
    w = x[a - 1 : b]
    nw, d = w.shape
    mu = [sum(w[:, c]) / nw for c in range(d)]
    out = []
    for cj in range(d):
        for ci in range(cj + 1):
            acc = 0.0
            for t in range(nw):
                acc += w[t, ci] * w[t, cj]
            out.append(acc / nw - mu[ci] * mu[cj])
    return np.array(out)


def quantile_bruteforce(x, a, b, beta):
    w = sorted(x[a - 1 : b, 0])
    return np.array([w[quantile_rank(beta, len(w)) - 1]])


def u_tilde_naive(functional, x, l, z, u):
    if z == l or u == z:
        return np.zeros(functional.p)
    t1 = theta(functional, x, l + 1, z)
    t2 = theta(functional, x, z + 1, u)
    if t1 is None or t2 is None:
        return None
    return (u - z) * (z - l) * (t1 - t2)


def v_matrix_naive(functional, x, z, u):
    """Literal double-sum self-normalizer; degenerate terms contribute
    nothing (they are excluded, mirroring the evaluation contract)."""
    p = functional.p
    out = np.zeros((p, p))
    for j in range(1, z + 1):
        if j == z:
            continue
        t1 = theta(functional, x, 1, j)
        t2 = theta(functional, x, j + 1, z)
        if t1 is None or t2 is None:
            continue
        vec = j * (z - j) * (t1 - t2)
        out += np.outer(vec, vec)
    for j in range(z + 1, u + 1):
        if j == u:
            continue
        t1 = theta(functional, x, z + 1, j)
        t2 = theta(functional, x, j + 1, u)
        if t1 is None or t2 is None:
            continue
        vec = (u - j) * (j - z) * (t1 - t2)
        out += np.outer(vec, vec)
    return out


def detectors_naive_at_k(functional, x, m, k, siginv):
    """All five statistics at step k from their definitions.

    Returns {kind: value}; NaN marks a statistic whose every candidate term
    was skipped (degenerate window or singular normalizer).
    """
    th_tr = theta(functional, x, 1, m)
    d_terms, p_terms, dsn_terms, psn_terms = [], [], [], []
    q_val = math.nan
    for j in range(k):
        t2 = theta(functional, x, m + j + 1, m + k)
        t1 = theta(functional, x, 1, m + j)
        if t1 is not None and t2 is not None:
            diff = t1 - t2
            d_terms.append(
                (m + j) ** 2 * (k - j) ** 2 * float(diff @ siginv @ diff) / m**3
            )
        if th_tr is not None and t2 is not None:
            diff = th_tr - t2
            val = (k - j) ** 2 / m * float(diff @ siginv @ diff)
            p_terms.append(val)
            if j == 0:
                q_val = val
        if t2 is not None:
            v_mat = v_matrix_naive(functional, x, m + j, m + k)
            if t1 is not None:
                diff = t1 - t2
                sol, ok = spd_solve(v_mat, diff)
                if ok:
                    dsn_terms.append(
                        m * (m + j) ** 2 * (k - j) ** 2 * float(diff @ sol)
                    )
            if th_tr is not None:
                diff = th_tr - t2
                sol, ok = spd_solve(v_mat, diff)
                if ok:
                    psn_terms.append(m**3 * (k - j) ** 2 * float(diff @ sol))
    return {
        DetectorKind.D: max(d_terms) if d_terms else math.nan,
        DetectorKind.P: max(p_terms) if p_terms else math.nan,
        DetectorKind.Q: q_val,
        DetectorKind.DSN: max(dsn_terms) if dsn_terms else math.nan,
        DetectorKind.PSN: max(psn_terms) if psn_terms else math.nan,
    }


def qs_lrv_naive(Z, bandwidth):
    """Literal kernel-weighted autocovariance sum, explicit loops."""
    z = np.atleast_2d(np.asarray(Z, dtype=float))
    if z.shape[0] == 1 and np.asarray(Z).ndim == 1:
        z = z.T
    n, p = z.shape
    zc = z - z.mean(axis=0)
    sigma = np.zeros((p, p))
    for a in range(p):
        for b in range(p):
            sigma[a, b] = sum(zc[t, a] * zc[t, b] for t in range(n)) / n
    for lag in range(1, n):
        xq = lag / bandwidth
        arg = 6.0 * math.pi * xq / 5.0
        w = 25.0 / (12.0 * math.pi**2 * xq**2) * (math.sin(arg) / arg - math.cos(arg))
        g = np.zeros((p, p))
        for a in range(p):
            for b in range(p):
                g[a, b] = sum(zc[t, a] * zc[t - lag, b] for t in range(lag, n)) / n
        sigma += w * (g + g.T)
    return (sigma + sigma.T) / 2.0


def lr_forms(x, m, k, sigma_inv):
    """The two algebraically equal forms of the Gaussian likelihood-ratio
    statistic, per candidate split, plus the squared-weight variant and its
    partial-sum (CUSUM) representation."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1:
        x = x.T
    form_two_sample = []
    form_pooled = []
    weighted = []
    weighted_cusum = []
    s = np.vstack([np.zeros((1, x.shape[1])), np.cumsum(x, axis=0)])
    for j in range(k):
        n1 = m + j
        mu1 = s[n1] / n1
        mu2 = (s[m + k] - s[n1]) / (k - j)
        mu_pool = s[m + k] / (m + k)
        diff = mu1 - mu2
        diff_pool = mu1 - mu_pool
        form_two_sample.append(
            (m + j) * (k - j) / (m + k) * float(diff @ sigma_inv @ diff)
        )
        form_pooled.append(
            (m + k) * (m + j) / (k - j) * float(diff_pool @ sigma_inv @ diff_pool)
        )
        weighted.append(
            (m + j) ** 2 * (k - j) ** 2 * float(diff @ sigma_inv @ diff)
        )
        cus = (k - j) * s[n1] - (m + j) * (s[m + k] - s[n1])
        weighted_cusum.append(float(cus @ sigma_inv @ cus))
    return (
        np.array(form_two_sample),
        np.array(form_pooled),
        np.array(weighted),
        np.array(weighted_cusum),
    )
