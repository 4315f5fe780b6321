"""Right-tailed ADF regressions on arbitrary sub-windows.

The regression is ``dy_t = mu + delta * y_{t-1} + sum_i phi_i dy_{t-i} + e_t``
(intercept, no trend); the statistic is the t-ratio of ``delta`` and large
positive values point to explosive behaviour.

Window bounds in this module's public functions are 1-based, inclusive
observation numbers ``(r1, r2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import InputError, SingularDesign, WindowTooShort
from .series import Series

_SINGULAR_REASON = {
    K.SINGULAR_ZERO_DIAG: "regressor with zero sum of squares",
    K.SINGULAR_ILL_CONDITIONED: f"design condition estimate exceeds {K.COND_LIMIT:.0e}",
    K.SINGULAR_ZERO_RESIDUAL: "zero residual variance",
}


@dataclass(frozen=True)
class AdfSpec:
    """Lag specification.

    ``lag_rule="fixed"`` uses exactly ``lags`` lagged differences;
    ``lag_rule="bic"`` picks 0..``lags`` per window by BIC, capped at
    ``floor(12 * (n/100)**0.25)`` for a window of ``n`` observations.
    """

    lags: int = 0
    lag_rule: str = "fixed"

    def __post_init__(self):
        if self.lags < 0:
            raise InputError(f"lags must be >= 0, got {self.lags}")
        if self.lag_rule not in ("fixed", "bic"):
            raise InputError(f"lag_rule must be 'fixed' or 'bic', got {self.lag_rule!r}")

    @classmethod
    def parse(cls, text: str | int) -> "AdfSpec":
        """Parse the CLI form: ``"2"`` or ``"bic:6"``."""
        text = str(text).strip().lower()
        try:
            if text.startswith("bic:"):
                return cls(int(text[4:]), "bic")
            return cls(int(text), "fixed")
        except ValueError:
            raise InputError(f"cannot parse lag spec {text!r}; use N or bic:N") from None

    @property
    def bic_max(self) -> int:
        return self.lags if self.lag_rule == "bic" else -1

    @property
    def max_lags(self) -> int:
        return self.lags

    @property
    def min_obs(self) -> int:
        """Shortest admissible window in observations."""
        return int(K.min_window_obs(self.lags))

    def __str__(self) -> str:
        return f"bic:{self.lags}" if self.lag_rule == "bic" else str(self.lags)

    def to_json(self) -> dict:
        return {"lags": self.lags, "lag_rule": self.lag_rule}


@dataclass(frozen=True)
class AdfResult:
    stat: float
    delta_hat: float
    stderr_delta: float
    n_obs: int
    lags_used: int
    window: tuple[int, int] | None = None


def as_array(y) -> np.ndarray:
    values = y.values if isinstance(y, Series) else y
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError("expected a one-dimensional series")
    if not np.all(np.isfinite(arr)):
        raise InputError("series contains non-finite values")
    return arr


def centered(arr: np.ndarray) -> np.ndarray:
    # The intercept absorbs any level; removing it keeps cross-products small.
    return arr - arr.mean()


def prepare(y, spec: AdfSpec):
    arr = centered(as_array(y))
    hi, lo = K.prefix_cross_products(arr, spec.max_lags)
    return arr, hi, lo


def _result(status, lags, row, window):
    if status == K.OK:
        return AdfResult(float(row[0]), float(row[1]), float(row[2]), int(row[4]), int(lags), window)
    if status == K.TOO_SHORT:
        return WindowTooShort(f"window r1={window[0]}, r2={window[1]} has too few observations for {lags} lags")
    return SingularDesign(_SINGULAR_REASON[status], window)


def window_family_stats(y, r1_grid, r2, spec: AdfSpec = AdfSpec(), on_error: str = "raise") -> list:
    """ADF results for the windows ``[r1, r2]`` for each ``r1`` in ``r1_grid``.

    All windows are read off one set of prefix cross-products, so the family
    costs one pass over the data plus O(p^3) per window. ``r2`` may also be a
    sequence the same length as ``r1_grid``.

    With ``on_error="raise"`` the first failing window raises; with
    ``on_error="collect"`` its slot holds the exception instead.
    """
    if on_error not in ("raise", "collect"):
        raise ValueError("on_error must be 'raise' or 'collect'")
    arr, hi, lo = prepare(y, spec)
    T = arr.size
    starts = np.asarray(r1_grid, dtype=np.int64).ravel()
    ends = np.broadcast_to(np.asarray(r2, dtype=np.int64), starts.shape).copy()
    out: list = []
    checked = []
    for r1, e in zip(starts.tolist(), ends.tolist()):
        if not (1 <= r1 <= e <= T):
            raise InputError(f"window r1={r1}, r2={e} outside 1..{T}")
        if e - r1 + 1 < spec.min_obs:
            checked.append(
                WindowTooShort(f"window r1={r1}, r2={e} has {e - r1 + 1} observations; need {spec.min_obs}")
            )
        else:
            checked.append(None)
    status, lags, res = K.family(hi, lo, starts - 1, ends - 1, spec.lags, spec.bic_max, spec.max_lags)
    for i, (r1, e) in enumerate(zip(starts.tolist(), ends.tolist())):
        item = checked[i] or _result(int(status[i]), int(lags[i]), res[i], (r1, e))
        if isinstance(item, Exception) and on_error == "raise":
            raise item
        out.append(item)
    return out


def adf_stat(y, spec: AdfSpec = AdfSpec()) -> AdfResult:
    """ADF t-ratio on the whole of ``y`` (a Series or 1-d array)."""
    arr = as_array(y)
    if arr.size < spec.min_obs:
        raise WindowTooShort(f"segment has {arr.size} observations; need at least {spec.min_obs}")
    return window_family_stats(arr, [1], arr.size, spec)[0]


def max_lag_bound(n: int) -> int:
    """Schwert's rule ``floor(12 * (n/100)^0.25)``."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))
