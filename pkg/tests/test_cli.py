import json
import math
from pathlib import Path

import numpy as np
import pytest

from bubblestamp.cli import main
from bubblestamp.dgp import BubbleDgpConfig, generate
from bubblestamp.series import MonthIndex, Series, write_csv

REPS = ["--reps", "100", "--workers", "1"]


def json_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*.json"))}


def price(path, start, values):
    write_csv(Series(MonthIndex.parse(start), np.asarray(values, dtype=float)), path)
    return str(path)


@pytest.fixture(scope="module")
def prices(tmp_path_factory):
    d = tmp_path_factory.mktemp("prices")
    rng = np.random.default_rng(4)
    out = {}
    for name, offset in [("s", 0), ("cpi", 1), ("cpi_star", 0), ("ppi", 0), ("ppi_star", 2)]:
        out[name] = price(d / f"{name}.csv", f"2000M{1 + offset:02d}", np.exp(4 + np.cumsum(rng.normal(0, 0.01, 60))))
    return out


@pytest.fixture(scope="module")
def bubble_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("bubble")
    config = BubbleDgpConfig(T=150, bubble_windows=((90, 25),), seed=3, start_value=20.0)
    y, truth = generate(config)
    write_csv(y, d / "bubble.csv")
    return d / "bubble.csv", truth


class TestFundamentals:
    def test_writes_variants(self, prices, tmp_path):
        args = ["fundamentals", "--out", str(tmp_path)]
        for name, path in prices.items():
            args += ["--" + name.replace("_", "-"), path]
        assert main(args) == 0
        names = {p.name for p in tmp_path.glob("*.csv")}
        assert len(names) == 5
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["parameters"]["trimmed"]
        assert set(manifest["inputs"]) == set(prices)

    def test_missing_input_names_flag(self, prices, tmp_path, capsys):
        args = ["fundamentals", "--out", str(tmp_path)]
        for name, path in prices.items():
            if name != "ppi":
                args += ["--" + name.replace("_", "-"), path]
        assert main(args) == 2
        assert "--ppi" in capsys.readouterr().err

    def test_bad_date_is_input_error(self, prices, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("date,value\n2000M13,1.0\n2000M14,2.0\n")
        args = ["fundamentals", "--out", str(tmp_path / "o")]
        for name, path in prices.items():
            args += ["--" + name.replace("_", "-"), str(bad) if name == "s" else path]
        assert main(args) == 2


class TestTestCommand:
    def test_detects_injected_bubble(self, bubble_csv, tmp_path, capsys):
        path, truth = bubble_csv
        assert main(["test", "--input", str(path), "--out", str(tmp_path), *REPS, "--seed", "5"]) == 0
        assert "GSADF" in capsys.readouterr().out
        result = json.loads((tmp_path / "result.json").read_text())
        table = json.loads((tmp_path / "critvals.json").read_text())
        assert result["gsadf"] > table["gsadf"]["0.95"]
        eps = json.loads((tmp_path / "episodes.json").read_text())["episodes"]
        true_start, true_end = truth.episodes[0].start, truth.episodes[0].end
        assert any(
            MonthIndex.parse(e["start"]) <= true_end and MonthIndex.parse(e["end"]) >= true_start for e in eps
        )
        for name in ("bsadf.csv", "indicator.csv", "bsadf.svg", "panel.txt", "manifest.json"):
            assert (tmp_path / name).exists()

    def test_rerun_byte_identical(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        for sub in ("a", "b"):
            assert main(["test", "--input", str(path), "--out", str(tmp_path / sub), *REPS, "--seed", "5"]) == 0
        a, b = json_bytes(tmp_path / "a"), json_bytes(tmp_path / "b")
        assert a and a == b
        assert (tmp_path / "a" / "bsadf.svg").read_bytes() == (tmp_path / "b" / "bsadf.svg").read_bytes()

    def test_sample_shorter_than_window(self, tmp_path, capsys):
        path = price(tmp_path / "short.csv", "2000M01", np.arange(1.0, 11.0))
        assert main(["test", "--input", path, "--out", str(tmp_path / "o"), "--min-window", "20", *REPS]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_level(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        assert main(["test", "--input", str(path), "--out", str(tmp_path), "--level", "0.8", *REPS]) == 2

    def test_stamp_from_saved_result(self, bubble_csv, tmp_path, capsys):
        path, _ = bubble_csv
        main(["test", "--input", str(path), "--out", str(tmp_path / "t"), *REPS, "--seed", "5", "--no-plot"])
        capsys.readouterr()
        rc = main(
            [
                "stamp",
                "--result",
                str(tmp_path / "t" / "result.json"),
                "--cv-table",
                str(tmp_path / "t" / "critvals.json"),
                "--out",
                str(tmp_path / "s"),
                "--no-plot",
            ]
        )
        assert rc == 0
        a = json.loads((tmp_path / "t" / "episodes.json").read_text())
        b = json.loads((tmp_path / "s" / "episodes.json").read_text())
        assert a == b

    def test_cv_table_mismatch(self, bubble_csv, tmp_path):
        path, _ = bubble_csv
        main(["critvals", "--T", "120", "--out", str(tmp_path / "cv"), *REPS])
        rc = main(["test", "--input", str(path), "--cv-table", str(tmp_path / "cv" / "critvals.json"), "--out", str(tmp_path / "o"), *REPS])
        assert rc == 2


class TestLogitCommand:
    def write_panel(self, tmp_path, r, x):
        ind = price(tmp_path / "r.csv", "1990M01", r)
        cov = price(tmp_path / "x.csv", "1990M01", x)
        return ind, cov

    def test_two_by_two(self, tmp_path):
        x = np.r_[np.ones(100), np.zeros(100)]
        r = np.r_[np.ones(30), np.zeros(70), np.ones(10), np.zeros(90)]
        ind, cov = self.write_panel(tmp_path, r, x)
        assert main(["logit", "--indicator", ind, "--covariate", f"X={cov}", "--out", str(tmp_path / "o")]) == 0
        fit = json.loads((tmp_path / "o" / "logit.json").read_text())
        assert abs(fit["coefficients"]["X"]["beta"] - math.log(27 / 7)) < 1e-6
        assert fit["n"] == 200 and fit["lr_df"] == 1

    def test_all_zero_indicator(self, tmp_path, capsys):
        ind, cov = self.write_panel(tmp_path, np.zeros(50), np.arange(50.0))
        assert main(["logit", "--indicator", ind, "--covariate", f"X={cov}", "--out", str(tmp_path / "o")]) == 2
        assert "error" in capsys.readouterr().err

    def test_three_covariates(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((465, 3))
        r = (rng.random(465) < 1 / (1 + np.exp(-(X @ [0.8, -0.4, 0.2] - 0.5)))).astype(float)
        ind = price(tmp_path / "r.csv", "1985M01", r)
        args = ["logit", "--indicator", ind, "--out", str(tmp_path / "o")]
        for j, name in enumerate(("GPR", "GEPU", "GPRI")):
            args += ["--covariate", f"{name}={price(tmp_path / f'{name}.csv', '1985M01', 100 * np.exp(0.1 * X[:, j]))}"]
            args += ["--transform", f"{name}=log"]
        assert main(args) == 0
        fit = json.loads((tmp_path / "o" / "logit.json").read_text())
        assert fit["n"] == 465 and fit["lr_df"] == 3
        assert "GPR" in (tmp_path / "o" / "logit.txt").read_text()

    def test_unknown_transform(self, tmp_path):
        ind, cov = self.write_panel(tmp_path, np.r_[np.ones(5), np.zeros(5)], np.arange(10.0))
        rc = main(["logit", "--indicator", ind, "--covariate", f"X={cov}", "--transform", "Y=log", "--out", str(tmp_path / "o")])
        assert rc == 2


class TestSimulate:
    def test_writes_sidecar(self, tmp_path):
        assert main(["simulate", "--T", "80", "--window", "30:10", "--seed", "1", "--out", str(tmp_path)]) == 0
        truth = json.loads((tmp_path / "simulated.truth.json").read_text())
        assert truth["config"]["bubble_windows"] == [[30, 10]]

    def test_bad_window(self, tmp_path):
        assert main(["simulate", "--T", "80", "--window", "75:10", "--out", str(tmp_path)]) == 2
        assert main(["simulate", "--T", "80", "--window", "x", "--out", str(tmp_path)]) == 2

    def test_usage_error(self, capsys):
        assert main(["simulate"]) == 2


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo")
    assert main(["simulate", "--demo", "--out", str(root / "data"), "--reps", "200"]) == 0
    for run in ("run1", "run2"):
        rc = main(["pipeline", "--config", str(root / "data" / "pipeline.ini"), "--out", str(root / run), "--workers", "1", "--no-plot"])
        assert rc == 0
    return root


@pytest.mark.slow
class TestPipelineDemo:
    def test_nine_tested_series(self, demo):
        assert len(list((demo / "run1").rglob("result.json"))) == 9
        summary = json.loads((demo / "run1" / "summary.json").read_text())
        assert set(summary["regimes"]) == {"full", "managed", "free"}

    def test_byte_identical(self, demo):
        a, b = json_bytes(demo / "run1"), json_bytes(demo / "run2")
        assert a.keys() == b.keys() and a == b

    def test_default_break_noted(self, demo, tmp_path):
        ini = (demo / "data" / "pipeline.ini").read_text().replace("break_after = 1997M07\n", "")
        cfg = demo / "data" / "nobreak.ini"
        cfg.write_text(ini)
        assert main(["pipeline", "--config", str(cfg), "--out", str(tmp_path), "--workers", "1", "--no-plot"]) == 0
        notes = json.loads((tmp_path / "manifest.json").read_text())["notes"]
        assert any("1997M07" in n for n in notes)

    def test_missing_data_section(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[test]\nseed = 1\n")
        assert main(["pipeline", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
