"""Recursive right-tailed ADF statistics: SADF, GSADF and the BSADF sequence.

Observation numbers are 1-based. For a sample of ``T`` observations and a
minimum window ``w0`` the end point ``r2`` runs over ``w0..T`` and, for
BSADF/GSADF, the start point ``r1`` over ``1..r2-w0+1``. SADF fixes
``r1 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .adf import AdfSpec, as_array, centered
from .errors import InputError, SingularDesign, WindowTooShort


def phillips_window(T: int) -> int:
    """``floor(T * (0.01 + 1.8 / sqrt(T)))``."""
    return int(math.floor(T * (0.01 + 1.8 / math.sqrt(T))))


@dataclass(frozen=True)
class WindowPolicy:
    """Minimum window rule: ``"phillips"`` or an explicit observation count."""

    rule: str = "phillips"
    min_window: int | None = None

    def __post_init__(self):
        if self.rule not in ("phillips", "explicit"):
            raise InputError(f"unknown window rule {self.rule!r}")
        if self.rule == "explicit" and (self.min_window is None or self.min_window < 2):
            raise InputError("explicit window rule needs min_window >= 2")

    @classmethod
    def explicit(cls, w0: int) -> "WindowPolicy":
        return cls("explicit", int(w0))

    @classmethod
    def parse(cls, text) -> "WindowPolicy":
        text = str(text).strip().lower()
        if text == "phillips":
            return cls()
        try:
            return cls.explicit(int(text))
        except ValueError:
            raise InputError(f"cannot parse minimum window {text!r}; use N or 'phillips'") from None

    def resolve(self, T: int, spec: AdfSpec = AdfSpec()) -> int:
        """Window length in observations for a sample of ``T``.

        The Phillips rule is floored at the smallest window the lag
        specification can estimate; an explicit window below that floor is
        an error.
        """
        floor = spec.min_obs
        if self.rule == "phillips":
            w0 = max(phillips_window(T), floor)
        else:
            w0 = self.min_window
            if w0 < floor:
                raise WindowTooShort(f"minimum window {w0} below {floor} required by lags={spec}")
        if w0 > T:
            raise WindowTooShort(f"sample of {T} observations is shorter than the minimum window {w0}")
        return w0

    def __str__(self) -> str:
        return "phillips" if self.rule == "phillips" else str(self.min_window)

    def to_json(self) -> dict:
        return {"rule": self.rule, "min_window": self.min_window}


@dataclass(frozen=True, eq=False)
class RecursiveResult:
    """Full-sample ADF, SADF, GSADF and the BSADF sequence.

    ``bsadf`` is indexed by end point: ``bsadf[i]`` belongs to observation
    ``w0 + i``. ``bsadf_start[i]`` is the start point attaining it.
    """

    T: int
    w0: int
    spec: AdfSpec
    policy: WindowPolicy
    adf: float
    sadf: float
    gsadf: float
    bsadf: np.ndarray
    bsadf_start: np.ndarray
    sadf_window: tuple[int, int]
    gsadf_window: tuple[int, int]
    n_singular: int = 0
    label: str = ""
    start_date: str | None = field(default=None)

    @property
    def bsadf_index(self) -> np.ndarray:
        return np.arange(self.w0, self.T + 1)

    @property
    def bsadf_seq(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.bsadf_index, self.bsadf)]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "start": self.start_date,
            "T": self.T,
            "adf": self.adf,
            "sadf": self.sadf,
            "gsadf": self.gsadf,
            "bsadf": [[i, _json_float(v)] for i, v in self.bsadf_seq],
            "argmax": {
                "adf": [1, self.T],
                "sadf": list(self.sadf_window),
                "gsadf": list(self.gsadf_window),
                "bsadf_start": [int(a) for a in self.bsadf_start],
            },
            "policy": {**self.policy.to_json(), "w0": self.w0},
            "spec": self.spec.to_json(),
            "n_singular": self.n_singular,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RecursiveResult":
        pol = obj["policy"]
        bs = obj["bsadf"]
        return cls(
            T=obj["T"],
            w0=pol["w0"],
            spec=AdfSpec(**obj["spec"]),
            policy=WindowPolicy(pol["rule"], pol["min_window"]),
            adf=obj["adf"],
            sadf=obj["sadf"],
            gsadf=obj["gsadf"],
            bsadf=np.array([-np.inf if v is None else v for _, v in bs], dtype=float),
            bsadf_start=np.array(obj["argmax"]["bsadf_start"], dtype=np.int64),
            sadf_window=tuple(obj["argmax"]["sadf"]),
            gsadf_window=tuple(obj["argmax"]["gsadf"]),
            n_singular=obj.get("n_singular", 0),
            label=obj.get("label", ""),
            start_date=obj.get("start"),
        )


def _json_float(v: float):
    return float(v) if math.isfinite(v) else None


def sweep(arr: np.ndarray, w0: int, spec: AdfSpec):
    """Raw kernel output for a prepared array: (bsadf, start0, anchored, n_singular)."""
    return K.recursive_sweep(arr, w0, spec.lags, spec.bic_max)


def summarize(bsadf, start0, anchored, w0):
    """Collapse one sweep into (adf, sadf, gsadf, sadf_r2, gsadf_window).

    Returns NaN/None entries when the relevant windows were all singular.
    """
    T = w0 + bsadf.size - 1
    adf = anchored[-1]
    finite_anchor = np.isfinite(anchored)
    if finite_anchor.any():
        i = int(np.argmax(np.where(finite_anchor, anchored, -np.inf)))
        sadf, sadf_r2 = float(anchored[i]), w0 + i
    else:
        sadf, sadf_r2 = math.nan, None
    if np.isfinite(bsadf).any():
        j = int(np.argmax(bsadf))
        gsadf, gwin = float(bsadf[j]), (int(start0[j]) + 1, w0 + j)
    else:
        gsadf, gwin = math.nan, None
    return float(adf), sadf, gsadf, sadf_r2, gwin, T


def recursive_test(y, policy: WindowPolicy = WindowPolicy(), spec: AdfSpec = AdfSpec()) -> RecursiveResult:
    """Compute ADF, SADF, GSADF and BSADF in a single sweep over all windows.

    Windows whose design is singular are skipped and counted in
    ``n_singular``. The full-sample window, or every window, being singular
    raises :class:`SingularDesign`.
    """
    arr = as_array(y)
    T = arr.size
    w0 = policy.resolve(T, spec)
    bs, start0, anchored, n_sing = sweep(centered(arr), w0, spec)
    adf, sadf, gsadf, sadf_r2, gwin, _ = summarize(bs, start0, anchored, w0)
    if gwin is None:
        raise SingularDesign("every window is singular")
    if not math.isfinite(adf):
        raise SingularDesign("full-sample regression is singular", (1, T))
    label = getattr(y, "label", "")
    start = getattr(y, "start", None)
    return RecursiveResult(
        T=T,
        w0=w0,
        spec=spec,
        policy=policy,
        adf=adf,
        sadf=sadf,
        gsadf=gsadf,
        bsadf=bs,
        bsadf_start=start0 + 1,
        sadf_window=(1, sadf_r2),
        gsadf_window=gwin,
        n_singular=int(n_sing),
        label=label,
        start_date=None if start is None else str(start),
    )


def sadf(y, policy: WindowPolicy = WindowPolicy(), spec: AdfSpec = AdfSpec()) -> tuple[float, tuple[int, int]]:
    """Sup of forward-expanding ADF statistics; returns ``(value, (1, r2))``."""
    res = recursive_test(y, policy, spec)
    return res.sadf, res.sadf_window


def gsadf(y, policy: WindowPolicy = WindowPolicy(), spec: AdfSpec = AdfSpec()) -> tuple[float, tuple[int, int]]:
    """Sup over all windows of length >= w0; returns ``(value, (r1, r2))``.

    Ties go to the first window in (r2, r1) order.
    """
    res = recursive_test(y, policy, spec)
    return res.gsadf, res.gsadf_window


def bsadf_sequence(y, policy: WindowPolicy = WindowPolicy(), spec: AdfSpec = AdfSpec()) -> list[tuple[int, float]]:
    return recursive_test(y, policy, spec).bsadf_seq
