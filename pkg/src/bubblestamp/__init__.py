"""Explosive-episode detection with recursive right-tailed unit-root tests."""

__version__ = "0.1.0"

from .adf import AdfResult, AdfSpec, adf_stat, window_family_stats
from .datestamp import (
    BubbleIndicator,
    Episode,
    EpisodeSet,
    episodes_from_indicator,
    log_t_duration,
    stamp_episodes,
    stamp_result,
    to_indicator,
)
from .dgp import BubbleDgpConfig, generate
from .errors import BubbleStampError, InputError
from .logit import CovariatePanel, LogitFit, align, fit_logit, lr_test, marginal_effects
from .montecarlo import CriticalValueTable, McConfig, cached_table, quantile, simulate_null
from .recursive import RecursiveResult, WindowPolicy, bsadf_sequence, gsadf, phillips_window, recursive_test, sadf
from .series import FundamentalSet, MonthIndex, Series, build_fundamentals, ingest_csv, split_regimes

__all__ = [
    "AdfResult",
    "AdfSpec",
    "BubbleDgpConfig",
    "BubbleIndicator",
    "BubbleStampError",
    "CovariatePanel",
    "CriticalValueTable",
    "Episode",
    "EpisodeSet",
    "FundamentalSet",
    "InputError",
    "LogitFit",
    "McConfig",
    "MonthIndex",
    "RecursiveResult",
    "Series",
    "WindowPolicy",
    "adf_stat",
    "align",
    "bsadf_sequence",
    "build_fundamentals",
    "cached_table",
    "episodes_from_indicator",
    "fit_logit",
    "generate",
    "gsadf",
    "ingest_csv",
    "log_t_duration",
    "lr_test",
    "marginal_effects",
    "phillips_window",
    "quantile",
    "recursive_test",
    "sadf",
    "simulate_null",
    "split_regimes",
    "stamp_episodes",
    "stamp_result",
    "to_indicator",
    "window_family_stats",
]
