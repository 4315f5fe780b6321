"""Episode date-stamping from a BSADF sequence and its critical sequence."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EpisodeOutOfRange, InputError, LengthMismatch
from .series import MonthIndex


@dataclass(frozen=True)
class Episode:
    """Closed interval ``[start, end]``; labels are MonthIndex or plain ints."""

    start: object
    end: object
    length: int
    peak_bsadf: float = math.nan
    ongoing: bool = False

    def __str__(self) -> str:
        return str(self.start) if self.length == 1 else f"{self.start}-{self.end}"


@dataclass(frozen=True)
class EpisodeSet:
    episodes: tuple[Episode, ...]
    min_duration: int = 1
    cv_level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "episodes", tuple(self.episodes))
        for prev, cur in zip(self.episodes, self.episodes[1:]):
            if not cur.start - prev.end > 0:
                raise InputError(f"episodes {prev} and {cur} overlap or are unsorted")

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self):
        return iter(self.episodes)

    @property
    def total_length(self) -> int:
        return sum(e.length for e in self.episodes)

    def describe(self) -> str:
        """Interval notation, e.g. ``1990M04-1993M09, 2015M09``; ``NEB`` when empty."""
        return ", ".join(str(e) for e in self.episodes) if self.episodes else "NEB"

    def to_json(self) -> dict:
        return {
            "min_duration": self.min_duration,
            "cv_level": self.cv_level,
            "episodes": [
                {
                    "start": str(e.start),
                    "end": str(e.end),
                    "length": e.length,
                    "peak_bsadf": None if math.isnan(e.peak_bsadf) else e.peak_bsadf,
                    "ongoing": e.ongoing,
                }
                for e in self.episodes
            ],
        }

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["start", "end", "length", "peak_bsadf", "ongoing"])
            for e in self.episodes:
                w.writerow([str(e.start), str(e.end), e.length, repr(float(e.peak_bsadf)), int(e.ongoing)])

    @classmethod
    def read_csv(cls, path, min_duration: int = 1, cv_level: float = 0.95) -> "EpisodeSet":
        eps = []
        with Path(path).open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                start, end = MonthIndex.parse(row["start"]), MonthIndex.parse(row["end"])
                peak = float(row.get("peak_bsadf") or "nan")
                eps.append(Episode(start, end, end - start + 1, peak, row.get("ongoing", "0") in ("1", "True", "true")))
        return cls(tuple(eps), min_duration, cv_level)


@dataclass(frozen=True, eq=False)
class BubbleIndicator:
    """0/1 vector over ``length`` consecutive periods starting at ``start``."""

    start: object
    r: np.ndarray
    source: EpisodeSet | None = field(default=None)

    def __len__(self) -> int:
        return self.r.size

    def dates(self) -> list:
        return [self.start + i for i in range(self.r.size)]


def log_t_duration(T: int, scale: float = 1.0) -> int:
    """Minimum duration ``floor(scale * ln T)``, at least one observation."""
    return max(1, int(math.floor(scale * math.log(T))))


def _values(seq) -> np.ndarray:
    seq = list(seq) if not isinstance(seq, np.ndarray) else seq
    if len(seq) and isinstance(seq[0], (tuple, list)):
        seq = [v for _, v in seq]
    return np.asarray(seq, dtype=float)


def stamp_episodes(
    bsadf,
    cv_seq,
    min_duration: int = 1,
    dates: Sequence | MonthIndex | int = 1,
    cv_level: float = 0.95,
) -> EpisodeSet:
    """Date episodes where ``bsadf`` runs above ``cv_seq``.

    An episode opens at the first point with ``bsadf > cv`` and its last
    point is the one before the first subsequent ``bsadf < cv``; equality
    keeps the current state. Runs shorter than ``min_duration`` are dropped.
    A run still open at the end of the sample is kept and flagged ongoing.

    ``dates`` labels the points: a sequence aligned with ``bsadf``, or the
    label of the first point (a MonthIndex, or an int observation number).
    """
    b = _values(bsadf)
    cv = _values(cv_seq)
    if b.shape != cv.shape:
        raise LengthMismatch(f"bsadf has {b.size} points, critical sequence {cv.size}")
    if min_duration < 1:
        raise InputError("min_duration must be >= 1")
    if isinstance(dates, (MonthIndex, int)):
        first = dates
        label = lambda i: first + i  # noqa: E731
    else:
        if len(dates) != b.size:
            raise LengthMismatch(f"{len(dates)} dates for {b.size} points")
        label = dates.__getitem__

    episodes = []

    def close(i0, i1, ongoing):
        n = i1 - i0 + 1
        if n >= min_duration:
            peak = float(np.max(b[i0 : i1 + 1]))
            episodes.append(Episode(label(i0), label(i1), n, peak, ongoing))

    open_at = None
    for i in range(b.size):
        if open_at is None:
            if b[i] > cv[i]:
                open_at = i
        elif b[i] < cv[i]:
            close(open_at, i - 1, False)
            open_at = None
    if open_at is not None:
        close(open_at, b.size - 1, True)
    return EpisodeSet(tuple(episodes), min_duration, cv_level)


def to_indicator(episodes: EpisodeSet, start, length: int) -> BubbleIndicator:
    """Indicator over ``length`` periods from ``start``: 1 inside an episode."""
    r = np.zeros(int(length), dtype=np.int8)
    for e in episodes:
        i0, i1 = e.start - start, e.end - start
        if i0 < 0 or i1 >= length:
            raise EpisodeOutOfRange(f"episode {e} outside {start}..{start + (length - 1)}")
        r[i0 : i1 + 1] = 1
    r.setflags(write=False)
    return BubbleIndicator(start, r, episodes)


def episodes_from_indicator(ind: BubbleIndicator, min_duration: int = 1) -> EpisodeSet:
    """Maximal runs of ones as episodes."""
    signal = ind.r.astype(float) - 0.5
    return stamp_episodes(signal, np.zeros_like(signal), min_duration, ind.start)


def stamp_result(result, table, level: float = 0.95, min_duration: int | str = 1) -> EpisodeSet:
    """Stamp a RecursiveResult against a matching CriticalValueTable."""
    table.check_matches(result.T, result.w0, result.spec)
    if isinstance(min_duration, str):
        if min_duration.lower() != "logt":
            raise InputError(f"min_duration must be an integer or 'logT', got {min_duration!r}")
        min_duration = log_t_duration(result.T)
    cv = table.level("bsadf", level)
    start = MonthIndex.parse(result.start_date) + (result.w0 - 1) if result.start_date else result.w0
    return stamp_episodes(result.bsadf, cv, int(min_duration), start, level)
