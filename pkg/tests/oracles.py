"""Independent reference implementations used by the tests.

None of these touch the package's kernels: regressions are solved with
``numpy.linalg.lstsq`` on explicitly built design matrices.
"""

from __future__ import annotations

import math

import numpy as np


def naive_adf(y, k: int = 0):
    """Textbook ADF on the whole of ``y``: ``(stat, delta, se, n)``.

    Regresses ``dy_t`` on ``[1, y_{t-1}, dy_{t-1}, ..., dy_{t-k}]``.
    """
    y = np.asarray(y, dtype=float)
    dy = np.diff(y)
    rows, lhs = [], []
    for t in range(k, dy.size):
        rows.append([1.0, y[t]] + [dy[t - i] for i in range(1, k + 1)])
        lhs.append(dy[t])
    X, z = np.array(rows), np.array(lhs)
    beta, *_ = np.linalg.lstsq(X, z, rcond=None)
    resid = z - X @ beta
    n, p = X.shape
    s2 = resid @ resid / (n - p)
    cov = s2 * np.linalg.inv(X.T @ X)
    se = math.sqrt(cov[1, 1])
    return beta[1] / se, beta[1], se, n


def brute_bsadf(y, w0: int, k: int = 0) -> np.ndarray:
    """BSADF by a double loop over (r2, r1), 1-based windows of length >= w0."""
    y = np.asarray(y, dtype=float)
    T = y.size
    out = np.full(T - w0 + 1, -np.inf)
    for r2 in range(w0, T + 1):
        for r1 in range(1, r2 - w0 + 2):
            stat = naive_adf(y[r1 - 1 : r2], k)[0]
            out[r2 - w0] = max(out[r2 - w0], stat)
    return out


def brute_sadf(y, w0: int, k: int = 0) -> float:
    y = np.asarray(y, dtype=float)
    return max(naive_adf(y[:r2], k)[0] for r2 in range(w0, y.size + 1))


def chi2_sf_quadrature(x: float, df: int, n: int = 20001) -> float:
    """Upper chi-square tail as ``1 - integral_0^x f``, composite Simpson on a
    substitution that removes the ``df = 1`` endpoint singularity."""
    if x <= 0:
        return 1.0
    # t = sqrt(u): f(u) du = f(t^2) 2t dt, finite at t = 0 for every df >= 1.
    t = np.linspace(0.0, math.sqrt(x), n)
    u = t * t
    logc = -(df / 2) * math.log(2.0) - math.lgamma(df / 2)
    with np.errstate(divide="ignore"):
        g = np.where(u > 0, np.exp(logc + (df / 2 - 1) * np.log(np.where(u > 0, u, 1.0)) - u / 2) * 2 * t, 0.0)
    if df == 1:
        g[0] = 2 * math.exp(logc)
    h = t[1] - t[0]
    integral = h / 3 * (g[0] + g[-1] + 4 * g[1:-1:2].sum() + 2 * g[2:-1:2].sum())
    return 1.0 - integral


def logistic(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))
