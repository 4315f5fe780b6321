import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblestamp.errors import (
    BreakOutOfRange,
    DuplicateDate,
    EmptyInput,
    InputError,
    MissingMonth,
    NonNumericValue,
    NonPositiveValue,
    RangeTooShort,
)
from bubblestamp.series import (
    DEFAULT_BREAK,
    MonthIndex,
    Series,
    build_fundamentals,
    concat,
    ingest_csv,
    log_series,
    split_regimes,
    write_csv,
)


def write_rows(path, rows, header="date,value"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def full_range():
    start = MonthIndex(1985, 1)
    rng = np.random.default_rng(3)
    n = 465

    def make(label, level=100.0):
        return Series(start, level * np.exp(np.cumsum(rng.normal(0, 0.01, n))), label)

    return {k: make(k) for k in ("s", "cpi", "cpi_star", "ppi", "ppi_star")}


class TestMonthIndex:
    def test_parse_forms(self):
        assert MonthIndex.parse("1997M08") == MonthIndex(1997, 8)
        assert MonthIndex.parse("1997M8") == MonthIndex(1997, 8)
        assert MonthIndex.parse("1997-08") == MonthIndex(1997, 8)

    def test_format_round_trip(self):
        assert str(MonthIndex.parse("1997M08")) == "1997M08"

    def test_successor_wraps_year(self):
        assert MonthIndex(1997, 12) + 1 == MonthIndex(1998, 1)

    def test_ordering_and_difference(self):
        a, b = MonthIndex(1985, 1), MonthIndex(2023, 9)
        assert a < b
        assert b - a + 1 == 465

    @pytest.mark.parametrize("bad", ["1997M13", "1997M00", "97M01", "1997/08", ""])
    def test_rejects_bad_literals(self, bad):
        with pytest.raises(InputError):
            MonthIndex.parse(bad)

    @given(st.integers(1000, 3000), st.integers(1, 12), st.integers(-500, 500))
    def test_add_subtract_inverse(self, y, m, k):
        a = MonthIndex(y, m)
        assert (a + k) - a == k
        assert MonthIndex.parse(str(a)) == a


class TestSeries:
    def test_length_one_rejected(self):
        with pytest.raises(InputError):
            Series(MonthIndex(1985, 1), [2.0])

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            Series(MonthIndex(1985, 1), [1.0, math.nan])

    def test_values_read_only(self):
        s = Series(MonthIndex(1985, 1), [1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_between_and_concat_partition(self):
        s = Series(MonthIndex(1985, 1), np.arange(10.0), "x")
        a = s.between(MonthIndex(1985, 1), MonthIndex(1985, 4))
        b = s.between(MonthIndex(1985, 5), MonthIndex(1985, 10))
        assert concat(a, b, "x") == s


class TestIngest:
    def test_two_rows(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["1985M1,1125", "1985M2,1138"])
        s = ingest_csv(p)
        assert s.start == MonthIndex(1985, 1)
        assert list(s.values) == [1125.0, 1138.0]

    def test_sorts_rows(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["1985-02,2", "1985-01,1", "1985-03,3"])
        assert list(ingest_csv(p).values) == [1.0, 2.0, 3.0]

    def test_gap_names_month(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["1985M1,1125", "1985M3,1140"])
        with pytest.raises(MissingMonth) as err:
            ingest_csv(p)
        assert "1985M02" in str(err.value)

    def test_non_numeric(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["1985M1,abc", "1985M2,1"])
        with pytest.raises(NonNumericValue):
            ingest_csv(p)

    def test_duplicate(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["1985M1,1", "1985M1,2"])
        with pytest.raises(DuplicateDate):
            ingest_csv(p)

    def test_empty(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", [])
        with pytest.raises(EmptyInput):
            ingest_csv(p)

    def test_custom_columns(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["x,1985M1,1", "y,1985M2,2"], header="note,month,rate")
        assert list(ingest_csv(p, "month", "rate").values) == [1.0, 2.0]

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e12, 1e12, allow_nan=False, allow_infinity=False), min_size=2, max_size=40))
    def test_round_trip_lossless(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("rt") / "s.csv"
        s = Series(MonthIndex(1990, 5), values, "x")
        write_csv(s, path)
        back = ingest_csv(path)
        assert back.start == s.start
        np.testing.assert_allclose(back.values, s.values, rtol=1e-15, atol=0)


class TestLogSeries:
    def test_identities(self):
        s = Series(MonthIndex(1985, 1), [1.0, math.e, math.e**2])
        np.testing.assert_allclose(log_series(s).values, [0.0, 1.0, 2.0], atol=1e-15)

    def test_non_positive_names_month(self):
        s = Series(MonthIndex(1990, 3), [1.0, 2.0, 0.0])
        with pytest.raises(NonPositiveValue) as err:
            log_series(s)
        assert "1990M05" in str(err.value)


class TestFundamentals:
    def test_flat_indices_give_zero_fundamentals(self, full_range):
        flat = {k: Series(v.start, np.full(len(v), 100.0), k) for k, v in full_range.items()}
        fs = build_fundamentals(full_range["s"], flat["cpi"], flat["cpi_star"], flat["ppi"], flat["ppi_star"])
        assert np.all(fs.f_traded.values == 0)
        assert np.all(fs.f_nontraded.values == 0)
        np.testing.assert_array_equal(fs.s_minus_fT.values, fs.s.values)

    def test_doubling_ppi_shifts_traded(self, full_range):
        d = full_range
        base = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])
        ppi2 = Series(d["ppi"].start, 2 * d["ppi"].values, "ppi")
        moved = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], ppi2, d["ppi_star"])
        np.testing.assert_allclose(moved.f_traded.values - base.f_traded.values, math.log(2), atol=1e-12)
        np.testing.assert_allclose(moved.s_minus_fT.values - base.s_minus_fT.values, -math.log(2), atol=1e-12)
        np.testing.assert_allclose(moved.f_nontraded.values - base.f_nontraded.values, -math.log(2), atol=1e-12)

    def test_hand_computed_nontraded(self, full_range):
        d = full_range
        fs = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])
        for i in (0, 200, 464):
            want = (math.log(d["cpi"].values[i]) - math.log(d["ppi"].values[i])) - (
                math.log(d["cpi_star"].values[i]) - math.log(d["ppi_star"].values[i])
            )
            assert abs(fs.f_nontraded.values[i] - want) < 1e-12

    def test_differences_exact(self, full_range):
        d = full_range
        fs = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])
        np.testing.assert_array_equal(fs.s_minus_fT.values, fs.s.values - fs.f_traded.values)
        np.testing.assert_array_equal(fs.s_minus_fN.values, fs.s.values - fs.f_nontraded.values)

    def test_intersects_ranges(self, full_range):
        d = dict(full_range)
        d["cpi"] = d["cpi"].between(MonthIndex(1986, 1), MonthIndex(2023, 9))
        fs = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])
        assert fs.start == MonthIndex(1986, 1)
        assert fs.trimmed == {"s": 12, "cpi_star": 12, "ppi": 12, "ppi_star": 12}

    def test_short_overlap(self, full_range):
        d = dict(full_range)
        d["cpi"] = d["cpi"].between(MonthIndex(2022, 1), MonthIndex(2023, 9))
        with pytest.raises(RangeTooShort):
            build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from(["cpi", "cpi_star", "ppi", "ppi_star"]), st.floats(0.01, 100.0))
    def test_rescaling_equivariance(self, full_range, which, c):
        d = full_range
        base = build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])
        scaled = dict(d)
        scaled[which] = Series(d[which].start, c * d[which].values, which)
        moved = build_fundamentals(scaled["s"], scaled["cpi"], scaled["cpi_star"], scaled["ppi"], scaled["ppi_star"])
        sign_t = {"ppi": 1, "ppi_star": -1}.get(which, 0)
        sign_n = {"cpi": 1, "ppi": -1, "cpi_star": -1, "ppi_star": 1}[which]
        lc = math.log(c)
        np.testing.assert_allclose(moved.f_traded.values - base.f_traded.values, sign_t * lc, atol=1e-12)
        np.testing.assert_allclose(moved.f_nontraded.values - base.f_nontraded.values, sign_n * lc, atol=1e-12)


@pytest.fixture(scope="module")
def fs(full_range):
    d = full_range
    return build_fundamentals(d["s"], d["cpi"], d["cpi_star"], d["ppi"], d["ppi_star"])


class TestRegimes:
    def test_default_split_lengths(self, fs):
        split = split_regimes(fs)
        assert split.break_after == DEFAULT_BREAK
        assert (len(split.managed), len(split.free), len(split.full)) == (151, 314, 465)
        assert split.managed.end + 1 == split.free.start

    def test_concatenation_recovers_full(self, fs):
        split = split_regimes(fs, "1997M07")
        assert concat(split.managed.s, split.free.s, "s") == fs.s

    def test_break_at_end(self, fs):
        with pytest.raises(BreakOutOfRange):
            split_regimes(fs, fs.end)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 462))
    def test_partition_property(self, fs, k):
        split = split_regimes(fs, fs.start + k)
        assert len(split.managed) + len(split.free) == len(fs)
