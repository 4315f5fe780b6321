"""Command-line interface.

Every command writes into its ``--out`` directory and leaves a
``manifest.json`` echoing resolved parameters, seeds and input digests.
Exit codes: 0 success, 1 internal error, 2 user or input error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .adf import AdfSpec
from .datestamp import EpisodeSet, log_t_duration, stamp_episodes, to_indicator
from .dgp import BubbleDgpConfig, generate, write_generated
from .errors import AllSameOutcome, BubbleStampError, InputError, PerfectSeparation
from .logit import align, fit_logit, format_report
from .montecarlo import GENERATOR_ID, CriticalValueTable, McConfig, cached_table
from .recursive import RecursiveResult, WindowPolicy, recursive_test
from .report import format_panel, plot_bsadf
from .series import (
    DEFAULT_BREAK,
    FundamentalSet,
    MonthIndex,
    Series,
    build_fundamentals,
    ingest_csv,
    split_regimes,
    write_csv,
)

log = logging.getLogger("bubblestamp")

DEFAULT_SEED = 20240112
DEFAULT_REPS = 2000
LEVELS = (0.90, 0.95, 0.99)
FUNDAMENTAL_INPUTS = ("s", "cpi", "cpi_star", "ppi", "ppi_star")


# ---------------------------------------------------------------- helpers


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n", encoding="utf-8")
    return path


def write_text(text: str, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


class Manifest:
    """Collects parameters, inputs and outputs for ``manifest.json``."""

    def __init__(self, command: str, out: Path):
        self.command = command
        self.out = out
        self.parameters: dict = {}
        self.inputs: dict = {}
        self.outputs: list[str] = []
        self.notes: list[str] = []

    def add_input(self, name: str, path) -> None:
        self.inputs[name] = {"path": str(path), "sha256": sha256(path)}

    def add_output(self, path) -> Path:
        self.outputs.append(Path(path).relative_to(self.out).as_posix())
        return Path(path)

    def write(self) -> Path:
        payload = {
            "command": self.command,
            "version": __version__,
            "generator": GENERATOR_ID,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "notes": self.notes,
        }
        return dump_json(payload, self.out / "manifest.json")


def existing(path, flag: str) -> Path:
    if path is None:
        raise InputError(f"{flag} is required")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{flag}: file not found: {p}")
    return p


def read_series(path, flag: str, date_column: str, value_column: str, label: str) -> Series:
    p = existing(path, flag)
    try:
        return ingest_csv(p, date_column, value_column, label)
    except InputError as e:
        raise InputError(f"{flag} ({p}): {e}") from e


def parse_level(text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"--level must be one of {LEVELS}, got {text!r}") from None
    for q in LEVELS:
        if abs(v - q) < 1e-12:
            return q
    raise InputError(f"--level must be one of {LEVELS}, got {text!r}")


def parse_min_duration(text):
    t = str(text).strip()
    if t.lower() == "logt":
        return "logT"
    try:
        n = int(t)
    except ValueError:
        raise InputError(f"--min-duration must be an integer or 'logT', got {text!r}") from None
    if n < 1:
        raise InputError("--min-duration must be >= 1")
    return n


def resolve_duration(md, T: int) -> int:
    return log_t_duration(T) if md == "logT" else int(md)


def parse_pairs(items, flag: str) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = str(item).partition("=")
        if not sep or not name.strip() or not value.strip():
            raise InputError(f"{flag} expects NAME=VALUE, got {item!r}")
        out[name.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class TestParams:
    """Resolved parameters shared by the test, critvals and pipeline commands."""

    seed: int = DEFAULT_SEED
    reps: int = DEFAULT_REPS
    policy: WindowPolicy = WindowPolicy()
    spec: AdfSpec = AdfSpec()
    level: float = 0.95
    min_duration: int | str = 1

    def mc_config(self, T: int) -> McConfig:
        return McConfig(T=T, reps=self.reps, seed=self.seed, policy=self.policy, spec=self.spec)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "reps": self.reps,
            "min_window": str(self.policy),
            "lags": str(self.spec),
            "level": self.level,
            "min_duration": self.min_duration,
        }


def params_from(args, base: TestParams = TestParams()) -> TestParams:
    """Override ``base`` with whichever shared flags were given."""
    seed = base.seed if args.seed is None else int(args.seed)
    reps = base.reps if args.reps is None else int(args.reps)
    policy = base.policy if args.min_window is None else WindowPolicy.parse(args.min_window)
    spec = base.spec if args.lags is None else AdfSpec.parse(args.lags)
    level = base.level if args.level is None else parse_level(args.level)
    md = base.min_duration if args.min_duration is None else parse_min_duration(args.min_duration)
    return TestParams(seed, reps, policy, spec, level, md)


def load_or_simulate(params: TestParams, T: int, args, manifest: Manifest, cv_flag: str = "--cv-table"):
    """Critical values for a sample of ``T``: from ``--cv-table`` or by simulation."""
    config = params.mc_config(T)
    cv_path = getattr(args, "cv_table", None)
    if cv_path:
        table = CriticalValueTable.load(existing(cv_path, cv_flag))
        manifest.add_input(cv_flag.lstrip("-"), cv_path)
        table.check_matches(T, config.w0, params.spec)
        if table.config.key() != config.key():
            manifest.notes.append(
                f"critical values loaded from {cv_path} (reps={table.config.reps}, seed={table.config.seed})"
            )
        return table
    return cached_table(config, args.cache_dir, args.workers)


# ------------------------------------------------------------ test stages


@dataclass
class TestOutcome:
    result: RecursiveResult
    table: CriticalValueTable
    episodes: EpisodeSet
    cv: np.ndarray


def run_test(series: Series, params: TestParams, table: CriticalValueTable) -> TestOutcome:
    result = recursive_test(series, params.policy, params.spec)
    table.check_matches(result.T, result.w0, result.spec)
    cv = table.level("bsadf", params.level)
    first = series.start + (result.w0 - 1)
    episodes = stamp_episodes(result.bsadf, cv, resolve_duration(params.min_duration, result.T), first, params.level)
    return TestOutcome(result, table, episodes, cv)


def write_bsadf_csv(outcome: TestOutcome, path) -> None:
    res, table = outcome.result, outcome.table
    qs = sorted(table.bsadf)
    start = MonthIndex.parse(res.start_date) if res.start_date else None
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "obs", "bsadf", "start_obs"] + [f"cv{q:g}" for q in qs])
        for i, (obs, v) in enumerate(zip(res.bsadf_index, res.bsadf)):
            date = str(start + (int(obs) - 1)) if start else ""
            w.writerow([date, int(obs), repr(float(v)), int(res.bsadf_start[i])] + [repr(float(table.bsadf[q][i])) for q in qs])


def write_indicator(episodes: EpisodeSet, start, T: int, path) -> Series:
    ind = to_indicator(episodes, start, T)
    s = Series(start, ind.r.astype(float), "indicator")
    write_csv(s, path)
    return s


def write_test_outputs(outcome: TestOutcome, series: Series, out: Path, manifest: Manifest, plot: bool, title: str):
    out.mkdir(parents=True, exist_ok=True)
    manifest.add_output(dump_json(outcome.result.to_json(), out / "result.json"))
    manifest.add_output(dump_json(outcome.episodes.to_json(), out / "episodes.json"))
    outcome.episodes.write_csv(out / "episodes.csv")
    manifest.add_output(out / "episodes.csv")
    write_bsadf_csv(outcome, out / "bsadf.csv")
    manifest.add_output(out / "bsadf.csv")
    write_indicator(outcome.episodes, series.start, len(series), out / "indicator.csv")
    manifest.add_output(out / "indicator.csv")
    if plot:
        manifest.add_output(plot_bsadf(outcome.result, outcome.cv, outcome.episodes, out / "bsadf.svg", title))


# --------------------------------------------------------------- commands


def cmd_fundamentals(args) -> int:
    out = Path(args.out)
    manifest = Manifest("fundamentals", out)
    fs = read_fundamentals(args, manifest)
    out.mkdir(parents=True, exist_ok=True)
    for name, s in fs.series().items():
        write_csv(s, out / f"{name}.csv")
        manifest.add_output(out / f"{name}.csv")
    manifest.parameters = {"date_column": args.date_column, "value_column": args.value_column, "trimmed": fs.trimmed}
    manifest.write()
    print(f"fundamentals {fs.start}..{fs.end} ({len(fs)} months) written to {out}")
    return 0


def read_fundamentals(args, manifest: Manifest, paths: dict | None = None) -> FundamentalSet:
    paths = paths or {name: getattr(args, name) for name in FUNDAMENTAL_INPUTS}
    data = {}
    for name in FUNDAMENTAL_INPUTS:
        flag = "--" + name.replace("_", "-")
        data[name] = read_series(paths[name], flag, args.date_column, args.value_column, name)
        manifest.add_input(name, paths[name])
    return build_fundamentals(data["s"], data["cpi"], data["cpi_star"], data["ppi"], data["ppi_star"])


def cmd_test(args) -> int:
    out = Path(args.out)
    manifest = Manifest("test", out)
    params = params_from(args)
    series = read_series(args.input, "--input", args.date_column, args.value_column, args.label or Path(args.input).stem)
    manifest.add_input("input", args.input)
    w0 = params.policy.resolve(len(series), params.spec)
    table = load_or_simulate(params, len(series), args, manifest)
    outcome = run_test(series, params, table)
    write_test_outputs(outcome, series, out, manifest, not args.no_plot, series.label)
    manifest.add_output(dump_json(table.to_json(), out / "critvals.json"))
    panel = format_panel([(series.label, outcome.result, outcome.episodes)], table, f"{series.label}: {series.start}..{series.end}")
    manifest.add_output(write_text(panel, out / "panel.txt"))
    manifest.parameters = {
        **params.to_json(),
        "T": len(series),
        "w0": w0,
        "min_duration_obs": outcome.episodes.min_duration,
        "date_column": args.date_column,
        "value_column": args.value_column,
        "cv_fingerprint": table.config.fingerprint(),
    }
    manifest.write()
    sys.stdout.write(panel)
    return 0


def cmd_critvals(args) -> int:
    out = Path(args.out)
    manifest = Manifest("critvals", out)
    params = params_from(args)
    config = params.mc_config(int(args.T))
    table = cached_table(config, args.cache_dir, args.workers)
    manifest.add_output(dump_json(table.to_json(), out / "critvals.json"))
    manifest.parameters = {**params.to_json(), "T": config.T, "w0": config.w0, "fingerprint": config.fingerprint()}
    manifest.write()
    for stat in ("adf", "sadf", "gsadf"):
        vals = "  ".join(f"{q:g}: {v:.4f}" for q, v in getattr(table, stat).items())
        print(f"{stat.upper():<6} {vals}")
    return 0


def cmd_stamp(args) -> int:
    out = Path(args.out)
    manifest = Manifest("stamp", out)
    res_path = existing(args.result, "--result")
    manifest.add_input("result", res_path)
    result = RecursiveResult.from_json(json.loads(res_path.read_text(encoding="utf-8")))
    table = CriticalValueTable.load(existing(args.cv_table, "--cv-table"))
    manifest.add_input("cv-table", args.cv_table)
    table.check_matches(result.T, result.w0, result.spec)
    level = 0.95 if args.level is None else parse_level(args.level)
    md = 1 if args.min_duration is None else parse_min_duration(args.min_duration)
    cv = table.level("bsadf", level)
    start = MonthIndex.parse(result.start_date) if result.start_date else 1
    episodes = stamp_episodes(result.bsadf, cv, resolve_duration(md, result.T), start + (result.w0 - 1), level)
    out.mkdir(parents=True, exist_ok=True)
    manifest.add_output(dump_json(episodes.to_json(), out / "episodes.json"))
    episodes.write_csv(out / "episodes.csv")
    manifest.add_output(out / "episodes.csv")
    if result.start_date:
        write_indicator(episodes, start, result.T, out / "indicator.csv")
        manifest.add_output(out / "indicator.csv")
    if not args.no_plot:
        manifest.add_output(plot_bsadf(result, cv, episodes, out / "bsadf.svg", result.label))
    manifest.parameters = {"level": level, "min_duration": md, "min_duration_obs": episodes.min_duration}
    manifest.write()
    print(f"{result.label or 'series'}: {episodes.describe()}")
    return 0


def fit_and_report(r_series: Series, covariates: dict, transforms: dict, title: str):
    r, panel = align(r_series, covariates, transforms)
    fit = fit_logit(r, panel)
    return fit, panel, format_report(fit, title)


def read_covariates(specs: dict, args, manifest: Manifest, base: Path | None = None) -> dict:
    cov = {}
    for name, path in specs.items():
        p = (base / path) if base is not None and not Path(path).is_absolute() else Path(path)
        cov[name] = read_series(p, f"--covariate {name}", args.date_column, args.value_column, name)
        manifest.add_input(f"covariate:{name}", p)
    return cov


def cmd_logit(args) -> int:
    out = Path(args.out)
    manifest = Manifest("logit", out)
    specs = parse_pairs(args.covariate, "--covariate")
    if not specs:
        raise InputError("--covariate NAME=PATH is required at least once")
    transforms = parse_pairs(args.transform, "--transform")
    unknown = set(transforms) - set(specs)
    if unknown:
        raise InputError(f"--transform names unknown covariates: {sorted(unknown)}")
    cov = read_covariates(specs, args, manifest)
    if (args.indicator is None) == (args.episodes is None):
        raise InputError("give exactly one of --indicator or --episodes")
    if args.indicator is not None:
        r_series = read_series(args.indicator, "--indicator", args.date_column, args.indicator_column, "indicator")
        manifest.add_input("indicator", args.indicator)
    else:
        eps = EpisodeSet.read_csv(existing(args.episodes, "--episodes"))
        manifest.add_input("episodes", args.episodes)
        starts = [c.start for c in cov.values()]
        ends = [c.end for c in cov.values()]
        first, last = max(starts), min(ends)
        if last < first:
            raise InputError("covariates do not overlap")
        ind = to_indicator(eps, first, last - first + 1)
        r_series = Series(first, ind.r.astype(float), "indicator")
    fit, panel, text = fit_and_report(r_series, cov, transforms, args.title or "")
    out.mkdir(parents=True, exist_ok=True)
    manifest.add_output(dump_json({"range": [str(panel.start), str(panel.start + (len(panel) - 1))], **fit.to_json()}, out / "logit.json"))
    manifest.add_output(write_text(text + "\n", out / "logit.txt"))
    manifest.parameters = {"transforms": {k: transforms.get(k, "level") for k in specs}, "indicator_column": args.indicator_column}
    manifest.write()
    print(text)
    return 0


def cmd_simulate(args) -> int:
    out = Path(args.out)
    manifest = Manifest("simulate", out)
    if args.demo:
        return write_demo(args, out, manifest)
    windows = []
    for w in args.window or ():
        s, sep, n = str(w).partition(":")
        try:
            windows.append((int(s), int(n)))
        except ValueError:
            raise InputError(f"--window expects START:LENGTH, got {w!r}") from None
    config = BubbleDgpConfig(
        T=args.T,
        alpha=1.0 / args.growth,
        bubble_windows=tuple(windows),
        innovation_sd=args.innovation_sd,
        collapse_fraction=args.collapse_fraction,
        seed=DEFAULT_SEED if args.seed is None else args.seed,
        start=MonthIndex.parse(args.start_date),
        start_value=args.start_value,
    )
    series, truth = generate(config)
    out.mkdir(parents=True, exist_ok=True)
    sidecar = write_generated(config, series, truth, out / f"{args.name}.csv")
    manifest.add_output(out / f"{args.name}.csv")
    manifest.add_output(sidecar)
    manifest.parameters = config.to_json()
    manifest.write()
    print(f"{args.name}: T={config.T}, true episodes {truth.describe()}")
    return 0


# ------------------------------------------------------------------- demo

DEMO_WINDOWS = ((60, 24), (300, 30))
DEMO_COVARIATES = ("GPR", "GEPU", "GPRI")


def write_demo(args, out: Path, manifest: Manifest) -> int:
    """Synthetic inputs for the pipeline: five price files, three covariates and a config.

    The log exchange rate carries two bubble windows; the covariates are
    positive indices whose level rises inside the true episodes.
    """
    T = args.T
    seed = DEFAULT_SEED if args.seed is None else args.seed
    start = MonthIndex.parse(args.start_date)
    windows = tuple((s, n) for s, n in DEMO_WINDOWS if s + n - 1 <= T) or ((T // 3, max(4, T // 10)),)
    config = BubbleDgpConfig(T=T, bubble_windows=windows, seed=seed, start=start, start_value=args.start_value or 20.0)
    bubble_series, truth = generate(config)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1])))
    log_s = 7.0 + 0.02 * bubble_series.values

    def index(level, sd):
        return np.exp(level + np.cumsum(rng.normal(0.0, sd, T)))

    prices = {
        "cpi": index(4.0, 0.006),
        "cpi_star": index(4.2, 0.003),
        "ppi": index(4.1, 0.006),
        "ppi_star": index(4.3, 0.003),
    }
    in_bubble = to_indicator(truth, start, T).r.astype(float)
    out.mkdir(parents=True, exist_ok=True)
    files = {"s": Series(start, np.exp(log_s), "s"), **{k: Series(start, v, k) for k, v in prices.items()}}
    for k, loading in zip(DEMO_COVARIATES, (0.6, 0.3, 0.0)):
        ar = np.zeros(T)
        e = rng.normal(0.0, 0.15, T)
        for t in range(1, T):
            ar[t] = 0.8 * ar[t - 1] + e[t]
        files[k] = Series(start, 100.0 * np.exp(ar + loading * in_bubble), k)
    for name, s in files.items():
        write_csv(s, out / f"{name.lower()}.csv")
        manifest.add_output(out / f"{name.lower()}.csv")
    ini = DEMO_CONFIG.format(seed=seed, reps=args.reps or DEFAULT_REPS)
    manifest.add_output(write_text(ini, out / "pipeline.ini"))
    manifest.add_output(dump_json({"config": config.to_json(), "true_episodes": truth.to_json()["episodes"]}, out / "truth.json"))
    manifest.parameters = {"T": T, "seed": seed, "start": str(start), "bubble": config.to_json()}
    manifest.write()
    print(f"demo dataset for {start}..{start + (T - 1)} written to {out}; true episodes {truth.describe()}")
    return 0


DEMO_CONFIG = """\
# Pipeline configuration. Paths are relative to this file.
[data]
s = s.csv
cpi = cpi.csv
cpi_star = cpi_star.csv
ppi = ppi.csv
ppi_star = ppi_star.csv
date_column = date
value_column = value

[test]
break_after = 1997M07
seed = {seed}
reps = {reps}
min_window = phillips
lags = 0
level = 0.95
min_duration = 1

[covariates]
GPR = gpr.csv
GEPU = gepu.csv
GPRI = gpri.csv

[transforms]
GPR = log
GEPU = log
GPRI = log
"""


# --------------------------------------------------------------- pipeline


def read_config(path: Path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with path.open(encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as e:
        raise InputError(f"--config ({path}): {e}") from None
    for section in ("data",):
        if not cp.has_section(section):
            raise InputError(f"--config ({path}): missing [{section}] section")
    return cp


def cmd_pipeline(args) -> int:
    cfg_path = existing(args.config, "--config")
    base = cfg_path.parent
    cp = read_config(cfg_path)
    out = Path(args.out)
    manifest = Manifest("pipeline", out)
    manifest.add_input("config", cfg_path)
    data = cp["data"]
    args.date_column = data.get("date_column", "date")
    args.value_column = data.get("value_column", "value")
    paths = {}
    for name in FUNDAMENTAL_INPUTS:
        if name not in data:
            raise InputError(f"--config ({cfg_path}): [data] lacks '{name}'")
        paths[name] = base / data[name]

    test = cp["test"] if cp.has_section("test") else {}
    try:
        base_params = TestParams(
            seed=int(test.get("seed", DEFAULT_SEED)),
            reps=int(test.get("reps", DEFAULT_REPS)),
            policy=WindowPolicy.parse(test.get("min_window", "phillips")),
            spec=AdfSpec.parse(test.get("lags", "0")),
            level=parse_level(test.get("level", "0.95")),
            min_duration=parse_min_duration(test.get("min_duration", "1")),
        )
    except ValueError as e:
        raise InputError(f"--config ({cfg_path}) [test]: {e}") from None
    params = params_from(args, base_params)
    if "break_after" in test:
        brk = MonthIndex.parse(test["break_after"])
    else:
        brk = DEFAULT_BREAK
        manifest.notes.append(f"break_after not set in config; defaulted to {DEFAULT_BREAK}")
    cache_dir = args.cache_dir or (str(base / test["cache_dir"]) if test.get("cache_dir") else None)
    args.cache_dir = cache_dir

    cov_specs = dict(cp["covariates"]) if cp.has_section("covariates") else {}
    transforms = dict(cp["transforms"]) if cp.has_section("transforms") else {}
    unknown = set(transforms) - set(cov_specs)
    if unknown:
        raise InputError(f"--config ({cfg_path}) [transforms] names unknown covariates: {sorted(unknown)}")

    with stage("fundamentals"):
        fs = read_fundamentals(args, manifest, paths)
        for name, s in fs.series().items():
            manifest.add_output(write_series(s, out / "fundamentals" / f"{name}.csv"))
        split = split_regimes(fs, brk)
    with stage("covariates"):
        cov = read_covariates(cov_specs, args, manifest, base) if cov_specs else {}

    summary = {"break_after": str(brk), "regimes": {}}
    logit_texts = []
    for regime, rfs in split.regimes().items():
        T = len(rfs)
        with stage(f"critical values [{regime}]"):
            table = cached_table(params.mc_config(T), cache_dir, args.workers)
            manifest.add_output(dump_json(table.to_json(), out / "critvals" / f"{regime}.json"))
        rows = []
        summary["regimes"][regime] = {"range": [str(rfs.start), str(rfs.end)], "T": T, "w0": table.w0, "series": {}}
        for variant, series in rfs.variants().items():
            where = f"{regime}/{variant}"
            with stage(f"test [{where}]"):
                outcome = run_test(series, params, table)
                write_test_outputs(outcome, series, out / regime / variant, manifest, not args.no_plot, f"{variant} ({regime})")
            rows.append((variant, outcome.result, outcome.episodes))
            entry = {
                "adf": outcome.result.adf,
                "sadf": outcome.result.sadf,
                "gsadf": outcome.result.gsadf,
                "episodes": outcome.episodes.describe(),
            }
            if cov:
                with stage(f"logit [{where}]"):
                    entry["logit"] = pipeline_logit(outcome, series, cov, transforms, out / regime / variant, manifest, where)
                    if entry["logit"] == "fitted":
                        logit_texts.append((out / regime / variant / "logit.txt").read_text(encoding="utf-8"))
            summary["regimes"][regime]["series"][variant] = entry
        title = f"{regime} sample {rfs.start}..{rfs.end}"
        manifest.add_output(write_text(format_panel(rows, table, title), out / regime / "tests_panel.txt"))
    if logit_texts:
        manifest.add_output(write_text("\n\n".join(logit_texts), out / "logit_panels.txt"))
    manifest.add_output(dump_json(summary, out / "summary.json"))
    manifest.parameters = {
        **params.to_json(),
        "break_after": str(brk),
        "date_column": args.date_column,
        "value_column": args.value_column,
        "cache_dir_used": cache_dir is not None,
        "transforms": {k: transforms.get(k, "level") for k in cov_specs},
    }
    manifest.write()
    for regime in split.regimes():
        sys.stdout.write((out / regime / "tests_panel.txt").read_text(encoding="utf-8") + "\n")
    for note in manifest.notes:
        print(f"note: {note}")
    return 0


def write_series(s: Series, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(s, path)
    return path


def pipeline_logit(outcome: TestOutcome, series: Series, cov: dict, transforms: dict, out: Path, manifest: Manifest, where: str) -> str:
    """Fit the logit for one tested series; degenerate indicators are noted and skipped."""
    ind = to_indicator(outcome.episodes, series.start, len(series))
    r_series = Series(series.start, ind.r.astype(float), "indicator")
    try:
        fit, panel, text = fit_and_report(r_series, cov, transforms, f"Logit: {where}")
    except (AllSameOutcome, PerfectSeparation) as e:
        manifest.notes.append(f"logit skipped for {where}: {e}")
        return f"skipped: {e}"
    manifest.add_output(dump_json({"range": [str(panel.start), str(panel.start + (len(panel) - 1))], **fit.to_json()}, out / "logit.json"))
    manifest.add_output(write_text(text + "\n", out / "logit.txt"))
    return "fitted"


class stage:
    """Prefix errors raised inside a pipeline stage with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or not isinstance(exc, BubbleStampError):
            return False
        cls = InputError if isinstance(exc, InputError) else BubbleStampError
        raise cls(f"stage {self.name}: {exc}") from exc


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, help=f"Monte-Carlo seed (default {DEFAULT_SEED})")
    shared.add_argument("--reps", type=int, help=f"Monte-Carlo replications (default {DEFAULT_REPS})")
    shared.add_argument("--min-window", help="minimum window: N or 'phillips' (default)")
    shared.add_argument("--lags", help="ADF lags: N or 'bic:N' (default 0)")
    shared.add_argument("--level", help="critical level for stamping: 0.90, 0.95 (default) or 0.99")
    shared.add_argument("--min-duration", help="minimum episode length: N (default 1) or 'logT'")
    shared.add_argument("--out", required=True, help="output directory")
    shared.add_argument("--workers", type=int, help="worker processes for simulation (default: all cores)")
    shared.add_argument("--cache-dir", help="directory caching critical-value tables")
    shared.add_argument("--no-plot", action="store_true", help="skip SVG output")
    shared.add_argument("-v", "--verbose", action="store_true")

    columns = argparse.ArgumentParser(add_help=False)
    columns.add_argument("--date-column", default="date")
    columns.add_argument("--value-column", default="value")

    p = argparse.ArgumentParser(prog="bubblestamp", description="Recursive right-tailed unit-root tests and bubble date-stamping.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fundamentals", parents=[shared, columns], help="build PPP fundamentals from five price files")
    for name in FUNDAMENTAL_INPUTS:
        f.add_argument("--" + name.replace("_", "-"), dest=name, help=f"{name} CSV")
    f.set_defaults(func=cmd_fundamentals)

    t = sub.add_parser("test", parents=[shared, columns], help="ADF/SADF/GSADF/BSADF with date-stamping")
    t.add_argument("--input", help="series CSV")
    t.add_argument("--label", help="series label (default: file stem)")
    t.add_argument("--cv-table", help="critical-value JSON from 'critvals'")
    t.set_defaults(func=cmd_test)

    c = sub.add_parser("critvals", parents=[shared], help="simulate critical values")
    c.add_argument("--T", type=int, required=True, help="sample size")
    c.set_defaults(func=cmd_critvals)

    s = sub.add_parser("stamp", parents=[shared], help="date-stamp a saved result against a critical-value table")
    s.add_argument("--result", help="result.json from 'test'")
    s.add_argument("--cv-table", help="critical-value JSON")
    s.set_defaults(func=cmd_stamp)

    lg = sub.add_parser("logit", parents=[shared, columns], help="logit of a bubble indicator on covariates")
    lg.add_argument("--indicator", help="indicator CSV (0/1)")
    lg.add_argument("--indicator-column", default="value")
    lg.add_argument("--episodes", help="episodes CSV, expanded over the covariates' common range")
    lg.add_argument("--covariate", action="append", metavar="NAME=PATH")
    lg.add_argument("--transform", action="append", metavar="NAME=log|level")
    lg.add_argument("--title")
    lg.set_defaults(func=cmd_logit)

    pl = sub.add_parser("pipeline", parents=[shared], help="fundamentals, regime tests and logits from a config file")
    pl.add_argument("--config", required=True, help="INI configuration")
    pl.set_defaults(func=cmd_pipeline)

    sm = sub.add_parser("simulate", parents=[shared], help="generate a bubble series or the demo dataset")
    sm.add_argument("--T", type=int, default=465)
    sm.add_argument("--growth", type=float, default=1.05, help="bubble growth factor 1/alpha")
    sm.add_argument("--window", action="append", metavar="START:LENGTH", help="bubble window, 1-based")
    sm.add_argument("--innovation-sd", type=float, default=1.0)
    sm.add_argument("--collapse-fraction", type=float, default=0.0)
    sm.add_argument("--start-value", type=float, help="bubble start value (default innovation-sd/10)")
    sm.add_argument("--start-date", default="1985M01")
    sm.add_argument("--name", default="simulated")
    sm.add_argument("--demo", action="store_true", help="write the bundled demo dataset and pipeline config")
    sm.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        if args.verbose:
            traceback.print_exc()
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
