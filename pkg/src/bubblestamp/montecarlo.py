"""Monte-Carlo critical values under a driftless Gaussian random-walk null.

Replication ``i`` draws its innovations from its own Philox stream keyed by
``SeedSequence(seed, spawn_key=(i,))``, so a table depends only on the
configuration, never on how replications are spread over workers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adf import AdfSpec
from .errors import BubbleStampError, CacheMismatch, EmptyInput, InputError, InsufficientReps
from .recursive import WindowPolicy, summarize, sweep

log = logging.getLogger(__name__)

GENERATOR_ID = "philox4x64-10/seedseq-spawn/standard_normal/v1"
DEFAULT_QUANTILES = (0.90, 0.95, 0.99)
MIN_REPS = 100


def rep_generator(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(rep),))))


def quantile(values, p: float) -> float:
    """Type-7 sample quantile: linear interpolation between order statistics.

    With sorted values ``x[0..n-1]`` and ``h = (n - 1) p`` the result is
    ``x[floor(h)] + (h - floor(h)) * (x[floor(h) + 1] - x[floor(h)])``.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise EmptyInput("quantile of an empty list")
    return float(_quantile_sorted(x, p))


def _quantile_sorted(x: np.ndarray, p: float):
    """Type-7 quantile along axis 0 of an array already sorted along axis 0."""
    if not 0.0 < p < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {p}")
    n = x.shape[0]
    h = (n - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return x[lo] + frac * (x[hi] - x[lo])


@dataclass(frozen=True)
class McConfig:
    T: int
    reps: int = 2000
    seed: int = 0
    policy: WindowPolicy = WindowPolicy()
    spec: AdfSpec = AdfSpec()
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES

    def __post_init__(self):
        qs = tuple(float(q) for q in self.quantiles)
        object.__setattr__(self, "quantiles", qs)
        if not qs or any(not 0.0 < q < 1.0 for q in qs) or list(qs) != sorted(set(qs)):
            raise InputError(f"quantiles must be distinct, ascending and inside (0, 1): {qs}")
        if self.reps < MIN_REPS:
            raise InsufficientReps(f"need at least {MIN_REPS} replications, got {self.reps}")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")

    @property
    def w0(self) -> int:
        return self.policy.resolve(self.T, self.spec)

    def key(self) -> dict:
        """Everything a cached table must agree on."""
        return {
            "T": self.T,
            "w0": self.w0,
            "lags": str(self.spec),
            "reps": self.reps,
            "seed": self.seed,
            "generator": GENERATOR_ID,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.key(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "reps": self.reps,
            "seed": self.seed,
            "policy": self.policy.to_json(),
            "w0": self.w0,
            "spec": self.spec.to_json(),
            "quantiles": list(self.quantiles),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "McConfig":
        pol = obj["policy"]
        return cls(
            T=obj["T"],
            reps=obj["reps"],
            seed=obj["seed"],
            policy=WindowPolicy(pol["rule"], pol["min_window"]),
            spec=AdfSpec(**obj["spec"]),
            quantiles=tuple(obj["quantiles"]),
        )


@dataclass(frozen=True, eq=False)
class NullDraws:
    """Per-replication statistics, rows in replication order."""

    adf: np.ndarray
    sadf: np.ndarray
    gsadf: np.ndarray
    bsadf: np.ndarray  # (reps, T - w0 + 1)


def simulate_rep(config: McConfig, rep: int):
    """One null replication: ``(adf, sadf, gsadf, bsadf_row)``."""
    w0 = config.w0
    y = np.cumsum(rep_generator(config.seed, rep).standard_normal(config.T))
    y -= y.mean()
    bs, start0, anchored, n_sing = sweep(y, w0, config.spec)
    if n_sing:
        raise BubbleStampError(
            f"{n_sing} singular windows in null replication {rep} "
            f"(seed={config.seed}, T={config.T}, w0={w0}, lags={config.spec})"
        )
    adf, sadf, gsadf, *_ = summarize(bs, start0, anchored, w0)
    return adf, sadf, gsadf, bs


def _simulate_block(args):
    config, reps = args
    rows = [simulate_rep(config, r) for r in reps]
    return (
        np.array([r[0] for r in rows]),
        np.array([r[1] for r in rows]),
        np.array([r[2] for r in rows]),
        np.vstack([r[3] for r in rows]),
    )


def simulate_draws(config: McConfig, workers: int | None = None, reps=None) -> NullDraws:
    """Run the replications (all of them, or the given indices in that order)."""
    idx = list(range(config.reps)) if reps is None else [int(r) for r in reps]
    workers = (os.cpu_count() or 1) if workers is None else max(1, int(workers))
    if workers == 1 or len(idx) < 2 * workers:
        blocks = [_simulate_block((config, idx))]
    else:
        size = math.ceil(len(idx) / (workers * 4))
        chunks = [idx[i : i + size] for i in range(0, len(idx), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_simulate_block, [(config, c) for c in chunks]))
    return NullDraws(*(np.concatenate([b[j] for b in blocks]) for j in range(4)))


@dataclass(frozen=True, eq=False)
class CriticalValueTable:
    """Quantiles of the null statistics, keyed by probability.

    ``bsadf[q][i]`` is the critical value for end point ``w0 + i``.
    """

    config: McConfig
    adf: dict
    sadf: dict
    gsadf: dict
    bsadf: dict
    meta: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.config.T

    @property
    def w0(self) -> int:
        return self.config.w0

    def level(self, stat: str, q: float):
        table = getattr(self, stat)
        for k, v in table.items():
            if abs(k - q) < 1e-12:
                return v
        raise InputError(f"no {q} quantile in table (have {sorted(table)})")

    def check_matches(self, T: int, w0: int, spec: AdfSpec) -> None:
        if (self.T, self.w0, str(self.config.spec)) != (T, w0, str(spec)):
            raise CacheMismatch(
                f"critical values are for T={self.T}, w0={self.w0}, lags={self.config.spec}; "
                f"data needs T={T}, w0={w0}, lags={spec}"
            )

    def to_json(self) -> dict:
        fmt = lambda d: {f"{q:g}": v for q, v in d.items()}  # noqa: E731
        return {
            "key": self.config.key(),
            "fingerprint": self.config.fingerprint(),
            "config": self.config.to_json(),
            "meta": self.meta,
            "adf": fmt(self.adf),
            "sadf": fmt(self.sadf),
            "gsadf": fmt(self.gsadf),
            "bsadf": {f"{q:g}": [float(x) for x in v] for q, v in self.bsadf.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CriticalValueTable":
        config = McConfig.from_json(obj["config"])
        if obj.get("key") != config.key():
            raise CacheMismatch("critical-value file key does not match its configuration")
        parse = lambda d: {float(q): v for q, v in d.items()}  # noqa: E731
        return cls(
            config=config,
            adf=parse(obj["adf"]),
            sadf=parse(obj["sadf"]),
            gsadf=parse(obj["gsadf"]),
            bsadf={float(q): np.array(v, dtype=float) for q, v in obj["bsadf"].items()},
            meta=obj.get("meta", {}),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def table_from_draws(config: McConfig, draws: NullDraws) -> CriticalValueTable:
    sorted_cols = {
        "adf": np.sort(draws.adf),
        "sadf": np.sort(draws.sadf),
        "gsadf": np.sort(draws.gsadf),
        "bsadf": np.sort(draws.bsadf, axis=0),
    }
    out = {name: {} for name in sorted_cols}
    for q in config.quantiles:
        for name, x in sorted_cols.items():
            v = _quantile_sorted(x, q)
            out[name][q] = np.asarray(v, dtype=float) if name == "bsadf" else float(v)
    meta = {"generator": GENERATOR_ID, "numpy": np.__version__}
    return CriticalValueTable(config=config, meta=meta, **out)


def simulate_null(config: McConfig, workers: int | None = None) -> CriticalValueTable:
    """Simulate the null distribution and return its quantile table."""
    log.info("simulating %d null replications, T=%d, w0=%d", config.reps, config.T, config.w0)
    return table_from_draws(config, simulate_draws(config, workers))


def cache_path(cache_dir, config: McConfig) -> Path:
    return Path(cache_dir) / f"cv_T{config.T}_w{config.w0}_r{config.reps}_s{config.seed}_{config.fingerprint()}.json"


def cached_table(config: McConfig, cache_dir=None, workers: int | None = None) -> CriticalValueTable:
    """Load a table for ``config`` from ``cache_dir`` or simulate and store it."""
    if cache_dir is None:
        return simulate_null(config, workers)
    path = cache_path(cache_dir, config)
    if path.exists():
        table = CriticalValueTable.load(path)
        if table.config.key() != config.key():
            raise CacheMismatch(f"{path} holds a table for a different configuration")
        if not set(config.quantiles) <= set(table.sadf):
            raise CacheMismatch(f"{path} lacks some of the quantiles {config.quantiles}")
        return table
    table = simulate_null(config, workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table
