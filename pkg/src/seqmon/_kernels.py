"""Numba-compiled inner loops for detector evaluation and limit-process
simulation.

Everything here is private plumbing: callers prepare plain float64 arrays
(prefix sums of rows and of per-row vech products, plus the raw data for
quantile selection) and dispatch on small integer codes.  Window bounds are
1-based inclusive, matching the public API.

Degenerate windows (a correlation over a single row or over a constant
column) and numerically singular normalizer matrices are skipped, never
silently zeroed: the enclosing maxima simply exclude those terms, and the
callers receive skip counts.
"""

import numpy as np
from numba import njit, prange

F_MEAN = 0
F_VAR = 1
F_QUANT = 2
F_CORR = 3

# A normalizer counts as singular when the squared ratio of the extreme
# Cholesky pivots falls below this floor (or a pivot is non-positive).
RCOND_FLOOR = 1e-12


@njit(cache=True)
def _theta(code, beta, a, b, prefx, prefxx, data, out, mu, center):
    """Plug-in estimate over rows a..b into ``out``; False when degenerate.

    ``prefxx`` holds prefix sums of vech products of rows shifted by
    ``center`` (a fixed vector, typically the training mean); the variance
    and correlation are shift invariant, and centering keeps the moment
    differences well conditioned.
    """
    nw = b - a + 1
    if code == F_MEAN:
        for c in range(out.shape[0]):
            out[c] = (prefx[b, c] - prefx[a - 1, c]) / nw
        return True
    if code == F_VAR:
        d = mu.shape[0]
        for c in range(d):
            mu[c] = (prefx[b, c] - prefx[a - 1, c]) / nw - center[c]
        pos = 0
        for cj in range(d):
            for ci in range(cj + 1):
                m2 = (prefxx[b, pos] - prefxx[a - 1, pos]) / nw
                out[pos] = m2 - mu[ci] * mu[cj]
                pos += 1
        return True
    if code == F_QUANT:
        w = data[a - 1 : b, 0].copy()
        w.sort()
        r = int(np.ceil(beta * nw))
        if r > 1 and (r - 1) / nw >= beta:
            r -= 1
        if r < 1:
            r = 1
        if r > nw:
            r = nw
        out[0] = w[r - 1]
        return True
    # correlation
    if nw == 1:
        return False
    if nw <= 4:
        # tiny windows can have near-zero variance, where prefix-difference
        # rounding would be amplified by the normalization; evaluate directly
        mu1 = 0.0
        mu2 = 0.0
        for t in range(a - 1, b):
            mu1 += data[t, 0]
            mu2 += data[t, 1]
        mu1 /= nw
        mu2 /= nw
        v1 = 0.0
        v2 = 0.0
        cov = 0.0
        for t in range(a - 1, b):
            d1 = data[t, 0] - mu1
            d2 = data[t, 1] - mu2
            v1 += d1 * d1
            v2 += d2 * d2
            cov += d1 * d2
        v1 /= nw
        v2 /= nw
        cov /= nw
    else:
        mu1 = (prefx[b, 0] - prefx[a - 1, 0]) / nw - center[0]
        mu2 = (prefx[b, 1] - prefx[a - 1, 1]) / nw - center[1]
        v1 = (prefxx[b, 0] - prefxx[a - 1, 0]) / nw - mu1 * mu1
        cov = (prefxx[b, 1] - prefxx[a - 1, 1]) / nw - mu1 * mu2
        v2 = (prefxx[b, 2] - prefxx[a - 1, 2]) / nw - mu2 * mu2
    if v1 <= 0.0 or v2 <= 0.0:
        return False
    r2 = (cov * cov) / (v1 * v2)
    if r2 >= 1.0:
        out[0] = 1.0 if cov > 0.0 else -1.0
    else:
        out[0] = cov / np.sqrt(v1 * v2)
    return True


@njit(cache=True)
def _chol_solve2(A, L, b1, x1, b2, x2):
    """Solve the SPD system A x = b for two right-hand sides.

    Returns False when A is numerically singular: a non-positive pivot, or
    (min diag L / max diag L)^2 below RCOND_FLOOR.
    """
    p = A.shape[0]
    dmin = 1e300
    dmax = 0.0
    for c in range(p):
        s = A[c, c]
        for k in range(c):
            s -= L[c, k] * L[c, k]
        if s <= 0.0:
            return False
        root = np.sqrt(s)
        L[c, c] = root
        if root < dmin:
            dmin = root
        if root > dmax:
            dmax = root
        for r in range(c + 1, p):
            s2 = A[r, c]
            for k in range(c):
                s2 -= L[r, k] * L[c, k]
            L[r, c] = s2 / root
    if (dmin / dmax) * (dmin / dmax) < RCOND_FLOOR:
        return False
    # forward substitution L y = b, then back substitution L^T x = y
    for c in range(p):
        s = b1[c]
        t = b2[c]
        for k in range(c):
            s -= L[c, k] * x1[k]
            t -= L[c, k] * x2[k]
        x1[c] = s / L[c, c]
        x2[c] = t / L[c, c]
    for c in range(p - 1, -1, -1):
        s = x1[c]
        t = x2[c]
        for k in range(c + 1, p):
            s -= L[k, c] * x1[k]
            t -= L[k, c] * x2[k]
        x1[c] = s / L[c, c]
        x2[c] = t / L[c, c]
    return True


@njit(cache=True)
def _quad(mat, v):
    """v^T mat v."""
    p = v.shape[0]
    acc = 0.0
    for a in range(p):
        row = 0.0
        for b in range(p):
            row += mat[a, b] * v[b]
        acc += v[a] * row
    return acc


@njit(cache=True)
def nonsn_at_k(code, beta, prefx, prefxx, data, m, k, siginv, center):
    """Values of the three long-run-variance-normalized statistics at step k.

    Returns (d_value, p_value, q_value, skipped_d, skipped_p).  A statistic
    whose every candidate term was skipped comes back as NaN.
    """
    p = siginv.shape[0]
    d = prefx.shape[1]
    mu = np.empty(d)
    th1 = np.empty(p)
    th2 = np.empty(p)
    thtr = np.empty(p)
    v = np.empty(p)
    tr_ok = _theta(code, beta, 1, m, prefx, prefxx, data, thtr, mu, center)
    m3 = float(m) ** 3
    best_d = -1.0
    best_p = -1.0
    q_val = np.nan
    n_d = 0
    n_p = 0
    sk_d = 0
    sk_p = 0
    for j in range(k):
        ok2 = _theta(code, beta, m + j + 1, m + k, prefx, prefxx, data, th2, mu, center)
        ok1 = _theta(code, beta, 1, m + j, prefx, prefxx, data, th1, mu, center)
        if ok1 and ok2:
            for c in range(p):
                v[c] = th1[c] - th2[c]
            w = float(m + j) * float(k - j)
            term = w * w * _quad(siginv, v) / m3
            if term > best_d:
                best_d = term
            n_d += 1
        else:
            sk_d += 1
        if tr_ok and ok2:
            for c in range(p):
                v[c] = thtr[c] - th2[c]
            wp = float(k - j)
            term = wp * wp * _quad(siginv, v) / float(m)
            if term > best_p:
                best_p = term
            if j == 0:
                q_val = term
            n_p += 1
        else:
            sk_p += 1
    d_val = best_d if n_d > 0 else np.nan
    p_val = best_p if n_p > 0 else np.nan
    return d_val, p_val, q_val, sk_d, sk_p


@njit(cache=True)
def nonsn_locate(code, beta, prefx, prefxx, data, m, k, siginv, center):
    """argmax_j of the weighted two-sample objective at step k (smallest j
    on ties); -1 when every term was skipped."""
    p = siginv.shape[0]
    d = prefx.shape[1]
    mu = np.empty(d)
    th1 = np.empty(p)
    th2 = np.empty(p)
    v = np.empty(p)
    best = -1.0
    arg = -1
    for j in range(k):
        ok2 = _theta(code, beta, m + j + 1, m + k, prefx, prefxx, data, th2, mu, center)
        ok1 = _theta(code, beta, 1, m + j, prefx, prefxx, data, th1, mu, center)
        if not (ok1 and ok2):
            continue
        for c in range(p):
            v[c] = th1[c] - th2[c]
        w = float(m + j) * float(k - j)
        term = w * w * _quad(siginv, v)
        if term > best:
            best = term
            arg = j
    return arg


@njit(cache=True)
def v1_row(code, beta, prefx, prefxx, data, z, out, center):
    """First sum of the self-normalizer at split z: outer products of the
    weighted estimate differences over all interior splits of rows 1..z."""
    p = out.shape[0]
    d = prefx.shape[1]
    mu = np.empty(d)
    th_a = np.empty(p)
    th_b = np.empty(p)
    vec = np.empty(p)
    for a in range(p):
        for b in range(p):
            out[a, b] = 0.0
    for i in range(1, z):
        ok_a = _theta(code, beta, 1, i, prefx, prefxx, data, th_a, mu, center)
        ok_b = _theta(code, beta, i + 1, z, prefx, prefxx, data, th_b, mu, center)
        if not (ok_a and ok_b):
            continue
        w = float(i) * float(z - i)
        for a in range(p):
            vec[a] = w * (th_a[a] - th_b[a])
        for a in range(p):
            for b in range(p):
                out[a, b] += vec[a] * vec[b]


@njit(cache=True)
def v2_block(code, beta, prefx, prefxx, data, z, u, out, center):
    """Second sum of the self-normalizer over the window rows z+1..u."""
    p = out.shape[0]
    d = prefx.shape[1]
    mu = np.empty(d)
    th_a = np.empty(p)
    th_b = np.empty(p)
    vec = np.empty(p)
    for a in range(p):
        for b in range(p):
            out[a, b] = 0.0
    for i in range(z + 1, u):
        ok_a = _theta(code, beta, z + 1, i, prefx, prefxx, data, th_a, mu, center)
        ok_b = _theta(code, beta, i + 1, u, prefx, prefxx, data, th_b, mu, center)
        if not (ok_a and ok_b):
            continue
        w = float(u - i) * float(i - z)
        for a in range(p):
            vec[a] = w * (th_a[a] - th_b[a])
        for a in range(p):
            for b in range(p):
                out[a, b] += vec[a] * vec[b]


@njit(cache=True)
def sn_at_k(code, beta, prefx, prefxx, data, m, k, V1, center):
    """Values of the two self-normalized statistics at step k.

    ``V1[j]`` must hold v1_row for split m+j, j = 0..k-1.  Returns
    (dsn_value, psn_value, skipped).  Splits with a singular normalizer are
    excluded from the maxima; if all are excluded the value is NaN.
    """
    p = V1.shape[1]
    d = prefx.shape[1]
    mu = np.empty(d)
    th1 = np.empty(p)
    th2 = np.empty(p)
    thtr = np.empty(p)
    th_a = np.empty(p)
    th_b = np.empty(p)
    vec = np.empty(p)
    V = np.empty((p, p))
    L = np.empty((p, p))
    bd = np.empty(p)
    bp = np.empty(p)
    xd = np.empty(p)
    xp = np.empty(p)
    u = m + k
    tr_ok = _theta(code, beta, 1, m, prefx, prefxx, data, thtr, mu, center)
    m1 = float(m)
    m3 = m1 * m1 * m1
    best_d = -1.0
    best_p = -1.0
    n_d = 0
    n_p = 0
    skipped = 0
    for j in range(k):
        z = m + j
        ok2 = _theta(code, beta, z + 1, u, prefx, prefxx, data, th2, mu, center)
        if not ok2:
            skipped += 1
            continue
        for a in range(p):
            for b in range(p):
                V[a, b] = V1[j, a, b]
        for i in range(z + 1, u):
            ok_a = _theta(code, beta, z + 1, i, prefx, prefxx, data, th_a, mu, center)
            ok_b = _theta(code, beta, i + 1, u, prefx, prefxx, data, th_b, mu, center)
            if not (ok_a and ok_b):
                continue
            w = float(u - i) * float(i - z)
            for a in range(p):
                vec[a] = w * (th_a[a] - th_b[a])
            for a in range(p):
                for b in range(p):
                    V[a, b] += vec[a] * vec[b]
        ok1 = _theta(code, beta, 1, z, prefx, prefxx, data, th1, mu, center)
        for a in range(p):
            bd[a] = (th1[a] - th2[a]) if ok1 else 0.0
            bp[a] = (thtr[a] - th2[a]) if tr_ok else 0.0
        ok = _chol_solve2(V, L, bd, xd, bp, xp)
        if not ok:
            skipped += 1
            continue
        if ok1:
            w = float(m + j) * float(k - j)
            acc = 0.0
            for a in range(p):
                acc += bd[a] * xd[a]
            term = m1 * w * w * acc
            if term > best_d:
                best_d = term
            n_d += 1
        if tr_ok:
            wp = float(k - j)
            acc = 0.0
            for a in range(p):
                acc += bp[a] * xp[a]
            term = m3 * wp * wp * acc
            if term > best_p:
                best_p = term
            n_p += 1
    d_val = best_d if n_d > 0 else np.nan
    p_val = best_p if n_p > 0 else np.nan
    return d_val, p_val, skipped


@njit(cache=True)
def sn_locate(code, beta, prefx, prefxx, data, m, k, V1, center):
    """argmax_j of the self-normalized two-sample objective at step k."""
    p = V1.shape[1]
    d = prefx.shape[1]
    mu = np.empty(d)
    th1 = np.empty(p)
    th2 = np.empty(p)
    th_a = np.empty(p)
    th_b = np.empty(p)
    vec = np.empty(p)
    V = np.empty((p, p))
    L = np.empty((p, p))
    bd = np.empty(p)
    bp = np.empty(p)
    xd = np.empty(p)
    xp = np.empty(p)
    u = m + k
    best = -1.0
    arg = -1
    for j in range(k):
        z = m + j
        ok2 = _theta(code, beta, z + 1, u, prefx, prefxx, data, th2, mu, center)
        ok1 = _theta(code, beta, 1, z, prefx, prefxx, data, th1, mu, center)
        if not (ok1 and ok2):
            continue
        for a in range(p):
            for b in range(p):
                V[a, b] = V1[j, a, b]
        for i in range(z + 1, u):
            ok_a = _theta(code, beta, z + 1, i, prefx, prefxx, data, th_a, mu, center)
            ok_b = _theta(code, beta, i + 1, u, prefx, prefxx, data, th_b, mu, center)
            if not (ok_a and ok_b):
                continue
            w = float(u - i) * float(i - z)
            for a in range(p):
                vec[a] = w * (th_a[a] - th_b[a])
            for a in range(p):
                for b in range(p):
                    V[a, b] += vec[a] * vec[b]
        for a in range(p):
            bd[a] = th1[a] - th2[a]
            bp[a] = 0.0
        ok = _chol_solve2(V, L, bd, xd, bp, xp)
        if not ok:
            continue
        w = float(m + j) * float(k - j)
        acc = 0.0
        for a in range(p):
            acc += bd[a] * xd[a]
        term = w * w * acc
        if term > best:
            best = term
            arg = j
    return arg


# ---------------------------------------------------------------------------
# limit-process simulation
#
# One Brownian path W on the uniform grid of [0, T+1] yields, per detector
# kind, the inner maxima over the candidate-split coordinate at every
# monitoring time, which are then divided by each threshold shape and
# maximized over time.  The self-normalizing integrals are left-Riemann sums
# assembled in O(p^2) per (s, t) pair from prefix sums of W, r W and W W^T.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _path_sups(W, rvals, i1, want, w0, cumr1, cumr2, dt, out):
    """Suprema of the five limit statistics for one path, three families.

    W: (N, p) Brownian path; rvals: grid values; i1: index of time 1;
    want: (5,) bool mask [D, P, Q, DSN, PSN]; w0: (N - i1, 3) threshold
    shapes at t - 1; cumr1/cumr2: left-Riemann prefix integrals of r and
    r^2 (length N + 1).  Writes the (5, 3) suprema into ``out``.
    """
    N = W.shape[0]
    p = W.shape[1]
    want_sn = want[3] or want[4]

    cumW = np.zeros((N + 1, p))
    cumrW = np.zeros((N + 1, p))
    cumWW = np.zeros((N + 1, p, p))
    N1s = np.zeros((N - i1, p, p))
    if want_sn:
        for i in range(N):
            r = rvals[i]
            for a in range(p):
                wa = W[i, a]
                cumW[i + 1, a] = cumW[i, a] + wa * dt
                cumrW[i + 1, a] = cumrW[i, a] + r * wa * dt
                for b in range(p):
                    cumWW[i + 1, a, b] = cumWW[i, a, b] + wa * W[i, b] * dt
        # N1(s) = s^2 Int WW^T - s (Int rW) W(s)^T - s W(s) (Int rW)^T + (Int r^2) W(s) W(s)^T
        for si in range(i1, N):
            s = rvals[si]
            for a in range(p):
                for b in range(p):
                    N1s[si - i1, a, b] = (
                        s * s * cumWW[si, a, b]
                        - s * (cumrW[si, a] * W[si, b] + W[si, a] * cumrW[si, b])
                        + cumr2[si] * W[si, a] * W[si, b]
                    )

    Bv = np.empty(p)
    Pv = np.empty(p)
    xB = np.empty(p)
    xP = np.empty(p)
    A = np.empty((p, p))
    L = np.empty((p, p))

    for kind in range(5):
        for fam in range(3):
            out[kind, fam] = -1.0

    for it in range(i1, N):
        t = rvals[it]
        m_d = -1.0
        m_p = -1.0
        m_dsn = -1.0
        m_psn = -1.0
        for si in range(i1, it + 1):
            s = rvals[si]
            nB = 0.0
            for c in range(p):
                bc = t * W[si, c] - s * W[it, c]
                Bv[c] = bc
                nB += bc * bc
            if want[0] and nB > m_d:
                m_d = nB
            if want[1] or want[4]:
                nP = 0.0
                for c in range(p):
                    pc = W[it, c] - W[si, c] + (s - t) * W[i1, c]
                    Pv[c] = pc
                    nP += pc * pc
                if want[1] and nP > m_p:
                    m_p = nP
            if want_sn:
                # N2(s,t): integrand (t-s) W(r) + r (W(s)-W(t)) + (s W(t) - t W(s))
                a1 = t - s
                dr0 = (it - si) * dt
                dr1 = cumr1[it] - cumr1[si]
                dr2 = cumr2[it] - cumr2[si]
                for a in range(p):
                    ba = W[si, a] - W[it, a]
                    ca = s * W[it, a] - t * W[si, a]
                    dWa = cumW[it, a] - cumW[si, a]
                    drWa = cumrW[it, a] - cumrW[si, a]
                    for b in range(p):
                        bb = W[si, b] - W[it, b]
                        cb = s * W[it, b] - t * W[si, b]
                        dWb = cumW[it, b] - cumW[si, b]
                        drWb = cumrW[it, b] - cumrW[si, b]
                        n2 = (
                            a1 * a1 * (cumWW[it, a, b] - cumWW[si, a, b])
                            + a1 * (drWa * bb + ba * drWb)
                            + a1 * (dWa * cb + ca * dWb)
                            + dr2 * ba * bb
                            + dr1 * (ba * cb + ca * bb)
                            + dr0 * ca * cb
                        )
                        A[a, b] = N1s[si - i1, a, b] + n2
                ok = _chol_solve2(A, L, Bv, xB, Pv, xP)
                if ok:
                    if want[3]:
                        acc = 0.0
                        for c in range(p):
                            acc += Bv[c] * xB[c]
                        if acc > m_dsn:
                            m_dsn = acc
                    if want[4]:
                        acc = 0.0
                        for c in range(p):
                            acc += Pv[c] * xP[c]
                        if acc > m_psn:
                            m_psn = acc
        ti = it - i1
        if want[2]:
            nQ = 0.0
            for c in range(p):
                qc = W[it, c] - t * W[i1, c]
                nQ += qc * qc
            for fam in range(3):
                val = nQ / w0[ti, fam]
                if val > out[2, fam]:
                    out[2, fam] = val
        for fam in range(3):
            wv = w0[ti, fam]
            if want[0]:
                val = m_d / wv
                if val > out[0, fam]:
                    out[0, fam] = val
            if want[1]:
                val = m_p / wv
                if val > out[1, fam]:
                    out[1, fam] = val
            if want[3] and m_dsn >= 0.0:
                val = m_dsn / wv
                if val > out[3, fam]:
                    out[3, fam] = val
            if want[4] and m_psn >= 0.0:
                val = m_psn / wv
                if val > out[4, fam]:
                    out[4, fam] = val


@njit(cache=True)
def _path_sups_p1(W, rvals, i1, want, w0, cumr1, cumr2, dt, out):
    """Scalar specialization of _path_sups for p = 1 (the hot table case)."""
    N = W.shape[0]
    want_sn = want[3] or want[4]

    cumW = np.zeros(N + 1)
    cumrW = np.zeros(N + 1)
    cumWW = np.zeros(N + 1)
    N1s = np.zeros(N - i1)
    if want_sn:
        for i in range(N):
            r = rvals[i]
            wa = W[i, 0]
            cumW[i + 1] = cumW[i] + wa * dt
            cumrW[i + 1] = cumrW[i] + r * wa * dt
            cumWW[i + 1] = cumWW[i] + wa * wa * dt
        for si in range(i1, N):
            s = rvals[si]
            ws = W[si, 0]
            N1s[si - i1] = s * s * cumWW[si] - 2.0 * s * cumrW[si] * ws + cumr2[si] * ws * ws

    for kind in range(5):
        for fam in range(3):
            out[kind, fam] = -1.0

    for it in range(i1, N):
        t = rvals[it]
        wt = W[it, 0]
        m_d = -1.0
        m_p = -1.0
        m_dsn = -1.0
        m_psn = -1.0
        for si in range(i1, it + 1):
            s = rvals[si]
            ws = W[si, 0]
            bv = t * ws - s * wt
            nB = bv * bv
            if nB > m_d:
                m_d = nB
            pv = wt - ws + (s - t) * W[i1, 0]
            nP = pv * pv
            if nP > m_p:
                m_p = nP
            if want_sn:
                a1 = t - s
                bb = ws - wt
                cc = s * wt - t * ws
                dr0 = (it - si) * dt
                dr1 = cumr1[it] - cumr1[si]
                dr2 = cumr2[it] - cumr2[si]
                dW = cumW[it] - cumW[si]
                drW = cumrW[it] - cumrW[si]
                dWW = cumWW[it] - cumWW[si]
                n2 = (
                    a1 * a1 * dWW
                    + 2.0 * a1 * (drW * bb + dW * cc)
                    + dr2 * bb * bb
                    + 2.0 * dr1 * bb * cc
                    + dr0 * cc * cc
                )
                denom = N1s[si - i1] + n2
                if denom > 0.0:
                    val = nB / denom
                    if val > m_dsn:
                        m_dsn = val
                    val = nP / denom
                    if val > m_psn:
                        m_psn = val
        ti = it - i1
        for fam in range(3):
            wv = w0[ti, fam]
            if want[0]:
                val = m_d / wv
                if val > out[0, fam]:
                    out[0, fam] = val
            if want[1]:
                val = m_p / wv
                if val > out[1, fam]:
                    out[1, fam] = val
            if want[2]:
                qc = wt - t * W[i1, 0]
                val = qc * qc / wv
                if val > out[2, fam]:
                    out[2, fam] = val
            if want[3] and m_dsn >= 0.0:
                val = m_dsn / wv
                if val > out[3, fam]:
                    out[3, fam] = val
            if want[4] and m_psn >= 0.0:
                val = m_psn / wv
                if val > out[4, fam]:
                    out[4, fam] = val


@njit(cache=True, parallel=True)
def limit_sups_batch(incs, rvals, i1, want, w0, cumr1, cumr2, dt):
    """Suprema for a batch of replicates; increments in, (R, 5, 3) out."""
    R = incs.shape[0]
    N = incs.shape[1] + 1
    p = incs.shape[2]
    sqdt = np.sqrt(dt)
    out = np.full((R, 5, 3), np.nan)
    for rep in prange(R):
        W = np.empty((N, p))
        for c in range(p):
            W[0, c] = 0.0
        for i in range(1, N):
            for c in range(p):
                W[i, c] = W[i - 1, c] + incs[rep, i - 1, c] * sqdt
        sups = np.empty((5, 3))
        if p == 1:
            _path_sups_p1(W, rvals, i1, want, w0, cumr1, cumr2, dt, sups)
        else:
            _path_sups(W, rvals, i1, want, w0, cumr1, cumr2, dt, sups)
        for kind in range(5):
            if want[kind]:
                for fam in range(3):
                    out[rep, kind, fam] = sups[kind, fam]
    return out


@njit(cache=True)
def ar_filter(eps, coeff):
    """x_i = coeff @ x_{i-1} + eps_i from a zero initial state."""
    n, d = eps.shape
    out = np.empty((n, d))
    prev = np.zeros(d)
    for i in range(n):
        for a in range(d):
            acc = eps[i, a]
            for b in range(d):
                acc += coeff[a, b] * prev[b]
            out[i, a] = acc
        for a in range(d):
            prev[a] = out[i, a]
    return out


@njit(cache=True)
def ma_filter(eps, coeff1, coeff2):
    """x_i = eps_i + coeff1 @ eps_{i-1} + coeff2 @ eps_{i-2}."""
    n, d = eps.shape
    out = np.empty((n, d))
    for i in range(n):
        for a in range(d):
            acc = eps[i, a]
            if i >= 1:
                for b in range(d):
                    acc += coeff1[a, b] * eps[i - 1, b]
            if i >= 2:
                for b in range(d):
                    acc += coeff2[a, b] * eps[i - 2, b]
            out[i, a] = acc
    return out
