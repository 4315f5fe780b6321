"""Monthly time series, CSV ingestion and PPP fundamentals."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass, field
from functools import total_ordering
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidDate,
    BreakOutOfRange,
    DuplicateDate,
    EmptyInput,
    InputError,
    MissingMonth,
    NonNumericValue,
    NonPositiveValue,
    RangeTooShort,
    SeriesLengthError,
)

log = logging.getLogger(__name__)

_MONTH_RE = re.compile(r"^\s*(\d{4})\s*(?:M|m|-)\s*(\d{1,2})\s*$")

MIN_FUNDAMENTAL_LENGTH = 24


@total_ordering
@dataclass(frozen=True)
class MonthIndex:
    """Calendar month. Formats as ``1997M08``; parses that form and ``1997-08``."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise InvalidDate(f"month must be in 1..12, got {self.month}")

    @classmethod
    def parse(cls, text: str) -> "MonthIndex":
        m = _MONTH_RE.match(str(text))
        if m is None:
            raise InvalidDate(f"cannot parse month {text!r}; expected YYYY-MM or YYYYMmm")
        return cls(int(m.group(1)), int(m.group(2)))

    @property
    def ordinal(self) -> int:
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_ordinal(cls, n: int) -> "MonthIndex":
        return cls(n // 12, n % 12 + 1)

    def __add__(self, months: int) -> "MonthIndex":
        return MonthIndex.from_ordinal(self.ordinal + int(months))

    def __sub__(self, other):
        if isinstance(other, MonthIndex):
            return self.ordinal - other.ordinal
        return MonthIndex.from_ordinal(self.ordinal - int(other))

    def __lt__(self, other: "MonthIndex") -> bool:
        return self.ordinal < other.ordinal

    def __str__(self) -> str:
        return f"{self.year:04d}M{self.month:02d}"

    def __repr__(self) -> str:
        return f"MonthIndex({self})"


def _as_month(m) -> MonthIndex:
    return m if isinstance(m, MonthIndex) else MonthIndex.parse(m)


class Series:
    """Gap-free monthly series of finite values.

    The values array is read-only; every transformation returns a new object.
    """

    __slots__ = ("start", "values", "label")

    def __init__(self, start, values: Iterable[float], label: str = ""):
        arr = np.array(values, dtype=np.float64).ravel()
        if arr.size < 2:
            raise SeriesLengthError(f"series {label!r} needs at least 2 observations, got {arr.size}")
        bad = np.flatnonzero(~np.isfinite(arr))
        start = _as_month(start)
        if bad.size:
            raise NonNumericValue(f"non-finite value at {start + int(bad[0])} in {label!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Series)
            and self.start == other.start
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"Series({self.label!r}, {self.start}..{self.end}, n={len(self)})"

    @property
    def end(self) -> MonthIndex:
        return self.start + (len(self) - 1)

    def dates(self) -> list[MonthIndex]:
        return [self.start + i for i in range(len(self))]

    def position(self, month) -> int:
        """0-based position of ``month``; raises KeyError when outside the range."""
        i = _as_month(month) - self.start
        if not 0 <= i < len(self):
            raise KeyError(f"{month} outside {self.start}..{self.end}")
        return i

    def between(self, first, last, label: str | None = None) -> "Series":
        i, j = self.position(first), self.position(last)
        return Series(self.start + i, self.values[i : j + 1], self.label if label is None else label)

    def relabel(self, label: str) -> "Series":
        return Series(self.start, self.values, label)

    def to_json(self) -> dict:
        return {"label": self.label, "start": str(self.start), "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "Series":
        return cls(MonthIndex.parse(obj["start"]), obj["values"], obj.get("label", ""))


def concat(first: Series, second: Series, label: str | None = None) -> Series:
    if first.end + 1 != second.start:
        raise InputError(f"cannot concatenate {first.start}..{first.end} with {second.start}..{second.end}")
    return Series(first.start, np.concatenate([first.values, second.values]), first.label if label is None else label)


def ingest_csv(path, date_column: str = "date", value_column: str = "value", label: str | None = None) -> Series:
    """Read a monthly series from a headed CSV file.

    Rows may appear in any order; they are sorted by date. Duplicated months,
    gaps and unparseable values raise with the offending row identified.
    """
    path = Path(path)
    rows: dict[MonthIndex, float] = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyInput(f"{path}: no header row")
        for col in (date_column, value_column):
            if col not in reader.fieldnames:
                raise InputError(f"{path}: column {col!r} not found (have {reader.fieldnames})")
        for lineno, row in enumerate(reader, start=2):
            raw_date = (row[date_column] or "").strip()
            raw_value = (row[value_column] or "").strip()
            if not raw_date and not raw_value:
                continue
            try:
                month = MonthIndex.parse(raw_date)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
            try:
                value = float(raw_value)
            except ValueError:
                raise NonNumericValue(f"{path}:{lineno}: value {raw_value!r} at {month} is not numeric") from None
            if not math.isfinite(value):
                raise NonNumericValue(f"{path}:{lineno}: value {raw_value!r} at {month} is not finite")
            if month in rows:
                raise DuplicateDate(month, f"{path}:{lineno}")
            rows[month] = value
    if not rows:
        raise EmptyInput(f"{path}: no data rows")
    months = sorted(rows)
    for prev, cur in zip(months, months[1:]):
        if cur - prev != 1:
            raise MissingMonth(prev + 1, str(path))
    return Series(months[0], [rows[m] for m in months], label if label is not None else value_column)


def write_csv(series: Series, path, value_name: str = "value") -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", value_name])
        for month, v in zip(series.dates(), series.values):
            w.writerow([str(month), repr(float(v))])


def write_json(series: Series, path) -> None:
    Path(path).write_text(json.dumps(series.to_json(), indent=2) + "\n", encoding="utf-8")


def log_series(x: Series, label: str | None = None) -> Series:
    nonpos = np.flatnonzero(x.values <= 0)
    if nonpos.size:
        i = int(nonpos[0])
        raise NonPositiveValue(x.start + i, float(x.values[i]), x.label)
    return Series(x.start, np.log(x.values), x.label if label is None else label)


def common_range(series: Sequence[Series]) -> tuple[MonthIndex, MonthIndex]:
    first = max(s.start for s in series)
    last = min(s.end for s in series)
    if last < first:
        raise RangeTooShort("input series do not overlap")
    return first, last


@dataclass(frozen=True, eq=False)
class FundamentalSet:
    """Log exchange rate, PPP fundamentals and the two deviation series."""

    s: Series
    f_traded: Series
    f_nontraded: Series
    s_minus_fT: Series
    s_minus_fN: Series
    trimmed: dict = field(default_factory=dict)

    VARIANTS = ("s", "s_minus_fN", "s_minus_fT")

    def __post_init__(self):
        for name in ("f_traded", "f_nontraded", "s_minus_fT", "s_minus_fN"):
            other = getattr(self, name)
            if other.start != self.s.start or len(other) != len(self.s):
                raise InputError(f"{name} is not aligned with s")

    @property
    def start(self) -> MonthIndex:
        return self.s.start

    @property
    def end(self) -> MonthIndex:
        return self.s.end

    def __len__(self) -> int:
        return len(self.s)

    def series(self) -> dict[str, Series]:
        return {
            "s": self.s,
            "f_traded": self.f_traded,
            "f_nontraded": self.f_nontraded,
            "s_minus_fT": self.s_minus_fT,
            "s_minus_fN": self.s_minus_fN,
        }

    def variants(self) -> dict[str, Series]:
        """The three series that go through the bubble tests."""
        return {k: getattr(self, k) for k in self.VARIANTS}

    def between(self, first, last) -> "FundamentalSet":
        return FundamentalSet(**{k: v.between(first, last) for k, v in self.series().items()})


def build_fundamentals(s_raw: Series, cpi: Series, cpi_star: Series, ppi: Series, ppi_star: Series) -> FundamentalSet:
    """Construct traded and non-traded PPP fundamentals on the common date range.

    ``f_traded = ln PPI - ln PPI*`` and
    ``f_nontraded = (ln CPI - ln PPI) - (ln CPI* - ln PPI*)``. Inputs with
    mismatched ranges are intersected; trimmed row counts are logged and kept
    in ``FundamentalSet.trimmed``.
    """
    inputs = {"s": s_raw, "cpi": cpi, "cpi_star": cpi_star, "ppi": ppi, "ppi_star": ppi_star}
    first, last = common_range(list(inputs.values()))
    n = last - first + 1
    if n < MIN_FUNDAMENTAL_LENGTH:
        raise RangeTooShort(f"common range {first}..{last} has {n} months; need {MIN_FUNDAMENTAL_LENGTH}")
    trimmed = {}
    logs = {}
    for name, x in inputs.items():
        cut = len(x) - n
        if cut:
            trimmed[name] = cut
            log.info("trimmed %d rows of %s to common range %s..%s", cut, name, first, last)
        logs[name] = log_series(x.between(first, last), label=name).values

    s = logs["s"]
    f_t = logs["ppi"] - logs["ppi_star"]
    f_n = (logs["cpi"] - logs["ppi"]) - (logs["cpi_star"] - logs["ppi_star"])
    return FundamentalSet(
        s=Series(first, s, "s"),
        f_traded=Series(first, f_t, "f_traded"),
        f_nontraded=Series(first, f_n, "f_nontraded"),
        s_minus_fT=Series(first, s - f_t, "s_minus_fT"),
        s_minus_fN=Series(first, s - f_n, "s_minus_fN"),
        trimmed=trimmed,
    )


DEFAULT_BREAK = MonthIndex(1997, 7)


@dataclass(frozen=True, eq=False)
class RegimeSplit:
    full: FundamentalSet
    managed: FundamentalSet
    free: FundamentalSet
    break_after: MonthIndex

    def regimes(self) -> dict[str, FundamentalSet]:
        return {"full": self.full, "managed": self.managed, "free": self.free}


def split_regimes(fs: FundamentalSet, break_after=DEFAULT_BREAK) -> RegimeSplit:
    """Split at ``break_after`` (last month of the managed regime, inclusive).

    Both parts need at least two observations.
    """
    b = _as_month(break_after)
    if not (fs.start + 1 <= b <= fs.end - 2):
        raise BreakOutOfRange(f"break {b} not strictly inside {fs.start}..{fs.end}")
    return RegimeSplit(
        full=fs,
        managed=fs.between(fs.start, b),
        free=fs.between(b + 1, fs.end),
        break_after=b,
    )
