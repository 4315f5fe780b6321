"""Synthetic series: random-walk fundamental plus explosive bubble windows."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datestamp import Episode, EpisodeSet
from .errors import ConfigInvalid
from .series import MonthIndex, Series, write_csv


@dataclass(frozen=True)
class BubbleDgpConfig:
    """Bubble data-generating process.

    ``bubble_windows`` holds ``(start, length)`` pairs in 1-based
    observations. Inside a window the bubble follows
    ``eta_t = eta_{t-1} / alpha + e_t`` from ``start_value`` (default
    ``innovation_sd / 10``); at the end it collapses to ``collapse_fraction``
    times its last value (0 resets it).
    """

    T: int
    alpha: float = 1 / 1.05
    bubble_windows: tuple[tuple[int, int], ...] = ()
    innovation_sd: float = 1.0
    collapse_fraction: float = 0.0
    seed: int = 0
    start: MonthIndex = MonthIndex(1985, 1)
    start_value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "bubble_windows", tuple((int(s), int(n)) for s, n in self.bubble_windows))
        if self.T < 2:
            raise ConfigInvalid("T must be at least 2")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigInvalid(f"alpha must lie in (0, 1) so that 1/alpha > 1, got {self.alpha}")
        if not self.innovation_sd > 0:
            raise ConfigInvalid("innovation_sd must be positive")
        if not 0.0 <= self.collapse_fraction < 1.0:
            raise ConfigInvalid("collapse_fraction must lie in [0, 1)")
        last_end = 0
        for s, n in sorted(self.bubble_windows):
            if n < 1 or s < 1 or s + n - 1 > self.T:
                raise ConfigInvalid(f"bubble window ({s}, {n}) outside 1..{self.T}")
            if s <= last_end:
                raise ConfigInvalid(f"bubble window ({s}, {n}) overlaps another window")
            last_end = s + n - 1

    @property
    def growth(self) -> float:
        return 1.0 / self.alpha

    @property
    def bubble_start(self) -> float:
        return self.innovation_sd / 10.0 if self.start_value is None else float(self.start_value)

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "alpha": self.alpha,
            "bubble_windows": [list(w) for w in self.bubble_windows],
            "innovation_sd": self.innovation_sd,
            "collapse_fraction": self.collapse_fraction,
            "seed": self.seed,
            "start": str(self.start),
            "start_value": self.bubble_start,
        }


def bubble_component(T: int, growth: float, windows, shocks: np.ndarray, start_value: float, collapse_fraction: float = 0.0):
    """Explosive component driven by ``shocks``; zero outside windows unless a
    partial collapse leaves a residual level behind.

    Each window grows from its entry level plus ``start_value``.
    """
    eta = np.zeros(T)
    level = 0.0
    ends = {}
    for s, n in windows:
        ends[s - 1] = s - 1 + n - 1
    t = 0
    while t < T:
        if t in ends:
            prev = level + start_value
            for u in range(t, ends[t] + 1):
                prev = growth * prev + shocks[u]
                eta[u] = prev
            level = collapse_fraction * prev
            t = ends[t] + 1
        else:
            eta[t] = level
            t += 1
    return eta


def generate(config: BubbleDgpConfig) -> tuple[Series, EpisodeSet]:
    """Random walk plus bubble windows, with the true windows as an EpisodeSet."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(config.seed))))
    u = rng.standard_normal(config.T) * config.innovation_sd
    e = rng.standard_normal(config.T) * config.innovation_sd
    fundamental = np.cumsum(u)
    eta = bubble_component(
        config.T,
        config.growth,
        sorted(config.bubble_windows),
        e,
        config.bubble_start,
        config.collapse_fraction,
    )
    series = Series(config.start, fundamental + eta, "simulated")
    truth = EpisodeSet(
        tuple(
            Episode(config.start + (s - 1), config.start + (s + n - 2), n)
            for s, n in sorted(config.bubble_windows)
        )
    )
    return series, truth


def write_generated(config: BubbleDgpConfig, series: Series, truth: EpisodeSet, csv_path) -> Path:
    """Write the series CSV and a ``.truth.json`` sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    write_csv(series, csv_path)
    sidecar = csv_path.with_suffix(".truth.json")
    payload = {"config": config.to_json(), "true_episodes": truth.to_json()["episodes"]}
    sidecar.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return sidecar
