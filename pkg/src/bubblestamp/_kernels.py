"""Compiled kernels for windowed ADF regressions.

Every window regression is read off prefix sums of the outer products of the
row vector

    z_t = [1, dy_{t-1}, ..., dy_{t-K}, y_{t-1}, dy_t]

so a window costs O(p^3) regardless of its length. Prefix sums are kept as
(hi, lo) pairs accumulated with TwoSum; window sums are differenced from
both parts, which removes the drift a plain running sum would suffer.

The regression is solved by a Cholesky factorisation of the unit-diagonal
(equilibrated) augmented matrix [X y]'[X y]. With y_{t-1} ordered last among
the regressors, the t-ratio on its coefficient is L[p, p-1] * sqrt(n - p) / L[p, p].
"""

import numpy as np
from numba import njit

OK = 0
SINGULAR_ZERO_DIAG = 1
SINGULAR_ILL_CONDITIONED = 2
SINGULAR_ZERO_RESIDUAL = 3
TOO_SHORT = 4

COND_LIMIT = 1e12
_EPS = np.finfo(np.float64).eps


@njit(cache=True)
def min_window_obs(k):
    """Smallest window (in observations) that can carry ``k`` lagged differences."""
    return max(k + 8, 2 * k + 4)


@njit(cache=True)
def schwert_bound(n):
    return int(np.floor(12.0 * (n / 100.0) ** 0.25))


@njit(cache=True)
def prefix_cross_products(y, max_lags):
    """Compensated prefix sums of z_t z_t' for t = 1..T-1 (0-based obs).

    Returns ``(hi, lo)`` each shaped (T, m, m) with m = max_lags + 3 and
    ``hi[0] = lo[0] = 0``; rows t..u sum to ``P[u] - P[t-1]``.
    """
    T = y.shape[0]
    m = max_lags + 3
    hi = np.zeros((T, m, m))
    lo = np.zeros((T, m, m))
    z = np.zeros(m)
    dy = np.zeros(T)
    for t in range(1, T):
        dy[t] = y[t] - y[t - 1]
    for t in range(1, T):
        z[0] = 1.0
        for i in range(1, max_lags + 1):
            z[i] = dy[t - i] if t - i >= 1 else 0.0
        z[m - 2] = y[t - 1]
        z[m - 1] = dy[t]
        for i in range(m):
            for j in range(i, m):
                v = z[i] * z[j]
                a = hi[t - 1, i, j]
                s = a + v
                bp = s - a
                err = (a - (s - bp)) + (v - bp)
                hi[t, i, j] = s
                lo[t, i, j] = lo[t - 1, i, j] + err
                hi[t, j, i] = s
                lo[t, j, i] = lo[t, i, j]
    return hi, lo


@njit(cache=True)
def window_regression(hi, lo, a, b, k, r, max_lags, M, L, out):
    """OLS of dy_t on [1, k lagged dy, y_{t-1}] over rows t = a+1+r .. b.

    ``a``/``b`` are 0-based inclusive window bounds, ``r >= k`` the number of
    leading rows skipped (r > k gives the common sample used by lag search).
    ``M``/``L`` are scratch buffers of at least (max_lags+3)^2.
    Writes (stat, delta_hat, stderr_delta, ssr, n_obs) into ``out`` and
    returns a status code.
    """
    n = b - a - r
    p = k + 2
    q = p + 1
    if n - p < 1:
        return TOO_SHORT
    m = max_lags + 3
    lo_row = a + r
    # column selection: intercept, lags 1..k, y_{t-1}, dy_t
    for ii in range(q):
        if ii <= k:
            ci = ii
        elif ii == p - 1:
            ci = m - 2
        else:
            ci = m - 1
        for jj in range(ii, q):
            if jj <= k:
                cj = jj
            elif jj == p - 1:
                cj = m - 2
            else:
                cj = m - 1
            v = (hi[b, ci, cj] - hi[lo_row, ci, cj]) + (lo[b, ci, cj] - lo[lo_row, ci, cj])
            M[ii, jj] = v
            M[jj, ii] = v

    # equilibrate to unit diagonal
    for ii in range(q):
        if not M[ii, ii] > 0.0:
            return SINGULAR_ZERO_DIAG if ii < p else SINGULAR_ZERO_RESIDUAL
    dx = np.sqrt(M[p - 1, p - 1])
    dyy = np.sqrt(M[p, p])
    for ii in range(q):
        di = np.sqrt(M[ii, ii])
        for jj in range(q):
            M[ii, jj] /= di
            M[jj, ii] /= di

    # Cholesky
    lmin = 1.0
    lmax = 0.0
    for jj in range(q):
        s = M[jj, jj]
        for kk in range(jj):
            s -= L[jj, kk] * L[jj, kk]
        if jj < p:
            if not s > 0.0:
                return SINGULAR_ILL_CONDITIONED
            d = np.sqrt(s)
            if d < lmin:
                lmin = d
            if d > lmax:
                lmax = d
        else:
            if not s > 64.0 * _EPS:
                return SINGULAR_ZERO_RESIDUAL
            d = np.sqrt(s)
        L[jj, jj] = d
        for ii in range(jj + 1, q):
            s2 = M[ii, jj]
            for kk in range(jj):
                s2 -= L[ii, kk] * L[jj, kk]
            L[ii, jj] = s2 / d
    if (lmax / lmin) ** 2 > COND_LIMIT:
        return SINGULAR_ILL_CONDITIONED

    l_last = L[p, p - 1]
    l_xx = L[p - 1, p - 1]
    l_res = L[p, p]
    dof = n - p
    s_res = l_res / np.sqrt(dof)
    delta = (l_last / l_xx) * dyy / dx
    se = (s_res / l_xx) * dyy / dx
    out[0] = l_last / s_res
    out[1] = delta
    out[2] = se
    out[3] = l_res * l_res * dyy * dyy
    out[4] = n
    return OK


@njit(cache=True)
def window_adf(hi, lo, a, b, k, bic_max, max_lags, M, L, out):
    """ADF on window [a, b] with fixed ``k`` or, if ``bic_max >= 0``, BIC lag choice.

    Returns ``(status, lags_used)``.
    """
    if bic_max < 0:
        return window_regression(hi, lo, a, b, k, k, max_lags, M, L, out), k
    length = b - a + 1
    kmax = min(bic_max, schwert_bound(length))
    while kmax > 0 and length < min_window_obs(kmax):
        kmax -= 1
    best = np.inf
    best_k = -1
    for kk in range(kmax + 1):
        st = window_regression(hi, lo, a, b, kk, kmax, max_lags, M, L, out)
        if st != OK:
            continue
        nc = out[4]
        bic = nc * np.log(out[3] / nc) + (kk + 2) * np.log(nc)
        if bic < best:
            best = bic
            best_k = kk
    if best_k < 0:
        st = window_regression(hi, lo, a, b, 0, 0, max_lags, M, L, out)
        return st, 0
    return window_regression(hi, lo, a, b, best_k, best_k, max_lags, M, L, out), best_k


@njit(cache=True)
def family(hi, lo, starts, ends, k, bic_max, max_lags):
    """Evaluate an arbitrary list of windows. Returns (status, lags, results[n, 5])."""
    nw = starts.shape[0]
    m = max_lags + 3
    M = np.empty((m, m))
    L = np.zeros((m, m))
    out = np.zeros(5)
    status = np.empty(nw, np.int64)
    lags = np.empty(nw, np.int64)
    res = np.full((nw, 5), np.nan)
    for w in range(nw):
        st, kk = window_adf(hi, lo, starts[w], ends[w], k, bic_max, max_lags, M, L, out)
        status[w] = st
        lags[w] = kk
        if st == OK:
            for c in range(5):
                res[w, c] = out[c]
    return status, lags, res


@njit(cache=True)
def recursive_sweep(y, w0, k, bic_max):
    """All windows of length >= w0, swept by end point.

    Returns per end point b = w0-1..T-1 (0-based):
      bsadf[b']     sup over start points (-inf if every window is singular)
      arg_start[b'] first start attaining it (-1 if none)
      anchored[b']  the start-0 window's statistic (nan if singular)
    and the number of singular windows skipped.
    """
    T = y.shape[0]
    max_lags = k if bic_max < 0 else bic_max
    hi, lo = prefix_cross_products(y, max_lags)
    m = max_lags + 3
    M = np.empty((m, m))
    L = np.zeros((m, m))
    out = np.zeros(5)
    nb = T - w0 + 1
    bsadf = np.full(nb, -np.inf)
    arg_start = np.full(nb, -1, np.int64)
    anchored = np.full(nb, np.nan)
    n_singular = 0
    for i in range(nb):
        b = w0 - 1 + i
        best = -np.inf
        best_a = -1
        for a in range(0, b - w0 + 2):
            st, _ = window_adf(hi, lo, a, b, k, bic_max, max_lags, M, L, out)
            if st != OK:
                n_singular += 1
                continue
            v = out[0]
            if a == 0:
                anchored[i] = v
            if v > best:
                best = v
                best_a = a
        bsadf[i] = best
        arg_start[i] = best_a
    return bsadf, arg_start, anchored, n_singular
