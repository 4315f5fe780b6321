"""Text panels and SVG plots for recursive-test results."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .datestamp import EpisodeSet
from .montecarlo import CriticalValueTable
from .recursive import RecursiveResult
from .series import MonthIndex

STAR_LEVELS = ((0.99, "***"), (0.95, "**"), (0.90, "*"))


def stars(value: float, table: CriticalValueTable, stat: str) -> str:
    """Significance marks against whichever of the 90/95/99% quantiles the table holds."""
    cvs = getattr(table, stat)
    for q, mark in STAR_LEVELS:
        for k, cv in cvs.items():
            if abs(k - q) < 1e-12 and math.isfinite(value) and value > cv:
                return mark
    return ""


def _cell(value: float, mark: str = "") -> str:
    return f"{value:10.4f}{mark:<3}" if math.isfinite(value) else f"{'nan':>10}   "


def format_panel(rows, table: CriticalValueTable, title: str = "") -> str:
    """Statistics with stars, critical values and episode lists.

    ``rows`` is a sequence of ``(label, RecursiveResult, EpisodeSet)``; every
    result must match ``table``.
    """
    head = f"{'':<14}" + "".join(f"{name:>10}   " for name in ("ADF", "SADF", "GSADF")) + "Episodes"
    out = []
    if title:
        out.append(title)
    first = rows[0][1] if rows else None
    if first is not None:
        out.append(f"T={first.T}, w0={first.w0}, lags={first.spec}")
    out.append(head)
    out.append("-" * len(head))
    for label, res, eps in rows:
        table.check_matches(res.T, res.w0, res.spec)
        line = f"{label:<14}"
        for stat in ("adf", "sadf", "gsadf"):
            v = getattr(res, stat)
            line += _cell(v, stars(v, table, stat))
        out.append(f"{line}   {eps.describe()}")
    for q in sorted(table.sadf, reverse=True):
        line = f"{f'CV {100 * (1 - q):g}%':<14}"
        for stat in ("adf", "sadf", "gsadf"):
            line += _cell(table.level(stat, q))
        out.append(line)
    out.append(f"Critical values: {table.config.reps} replications, seed {table.config.seed}.")
    out.append("*** / ** / * : significant at 1% / 5% / 10%.")
    return "\n".join(out) + "\n"


def _axis(result: RecursiveResult) -> np.ndarray:
    """Decimal-year positions of the BSADF points (observation numbers if undated)."""
    idx = result.bsadf_index
    if not result.start_date:
        return idx.astype(float)
    m0 = MonthIndex.parse(result.start_date)
    months = m0.ordinal + (idx - 1)
    return months / 12.0


def plot_bsadf(result: RecursiveResult, cv: np.ndarray, episodes: EpisodeSet, path, title: str = "") -> Path:
    """BSADF against its critical sequence with episodes shaded, written as SVG.

    Output is byte-stable: no date metadata and a fixed SVG id salt.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = _axis(result)
    with matplotlib.rc_context({"svg.hashsalt": "bubblestamp", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        for e in episodes:
            if result.start_date:
                a, b = e.start.ordinal / 12.0, (e.end.ordinal + 1) / 12.0
            else:
                a, b = float(e.start), float(e.end) + 1
            ax.axvspan(a, b, color="0.85", lw=0)
        ax.plot(x, np.where(np.isfinite(result.bsadf), result.bsadf, np.nan), color="tab:blue", lw=1, label="BSADF")
        ax.plot(x, cv, color="tab:red", lw=1, ls="--", label=f"{episodes.cv_level:g} critical value")
        ax.set_xlim(x[0], x[-1])
        ax.legend(loc="upper left", frameon=False, fontsize=8)
        if title:
            ax.set_title(title, fontsize=10)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
