import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblestamp.adf import AdfSpec, adf_stat, window_family_stats
from bubblestamp.dgp import BubbleDgpConfig, generate
from bubblestamp.errors import InputError, SingularDesign, WindowTooShort
from bubblestamp.recursive import (
    RecursiveResult,
    WindowPolicy,
    bsadf_sequence,
    gsadf,
    phillips_window,
    recursive_test,
    sadf,
    summarize,
)

from oracles import brute_bsadf, brute_sadf, naive_adf


def random_walk(seed, T):
    return np.cumsum(np.random.default_rng(seed).standard_normal(T))


class TestWindowPolicy:
    @pytest.mark.parametrize("T, w0", [(465, 43), (314, 35), (151, 23)])
    def test_phillips_rule(self, T, w0):
        assert phillips_window(T) == w0
        assert WindowPolicy().resolve(T) == w0

    def test_floor_for_lags(self):
        # phillips gives 8 at T=20; k=3 needs 11 observations
        assert phillips_window(20) == 8
        assert WindowPolicy().resolve(20, AdfSpec(3)) == AdfSpec(3).min_obs == 11

    def test_explicit_below_floor(self):
        with pytest.raises(WindowTooShort):
            WindowPolicy.explicit(9).resolve(100, AdfSpec(2))

    def test_window_longer_than_sample(self):
        with pytest.raises(WindowTooShort):
            WindowPolicy.explicit(50).resolve(40)

    def test_parse(self):
        assert WindowPolicy.parse("phillips") == WindowPolicy()
        assert WindowPolicy.parse("30") == WindowPolicy.explicit(30)
        with pytest.raises(InputError):
            WindowPolicy.parse("wide")


class TestRecursiveStatistics:
    def test_single_window_sample(self):
        y = random_walk(1, 30)
        res = recursive_test(y, WindowPolicy.explicit(30))
        assert res.sadf == res.adf == res.gsadf
        assert res.bsadf.size == 1

    def test_first_bsadf_entry_is_first_window(self):
        y = random_walk(2, 100)
        res = recursive_test(y, WindowPolicy.explicit(20))
        assert res.bsadf[0] == pytest.approx(adf_stat(y[:20]).stat, abs=1e-12)

    def test_gsadf_matches_brute_force(self):
        y = random_walk(3, 120)
        value, window = gsadf(y, WindowPolicy.explicit(20))
        brute = brute_bsadf(y, 20)
        assert value == pytest.approx(brute.max(), abs=1e-8)
        r1, r2 = window
        assert naive_adf(y[r1 - 1 : r2])[0] == pytest.approx(value, abs=1e-8)

    def test_bsadf_sequence_matches_brute_force(self):
        y = random_walk(4, 150)
        w0 = phillips_window(150)
        seq = bsadf_sequence(y)
        assert [i for i, _ in seq] == list(range(w0, 151))
        np.testing.assert_allclose([v for _, v in seq], brute_bsadf(y, w0), rtol=0, atol=1e-8)

    def test_sadf_matches_brute_force(self):
        y = random_walk(5, 150)
        value, (r1, r2) = sadf(y, WindowPolicy.explicit(25))
        assert r1 == 1
        assert value == pytest.approx(brute_sadf(y, 25), abs=1e-8)
        assert value == pytest.approx(naive_adf(y[:r2])[0], abs=1e-8)

    def test_lagged_sequence_matches_brute_force(self):
        y = random_walk(6, 90)
        res = recursive_test(y, WindowPolicy.explicit(20), AdfSpec(2))
        np.testing.assert_allclose(res.bsadf, brute_bsadf(y, 20, 2), rtol=0, atol=1e-8)

    def test_structure(self):
        res = recursive_test(random_walk(7, 200))
        assert res.bsadf.size == res.T - res.w0 + 1
        assert res.gsadf == res.bsadf.max()
        assert res.gsadf >= res.sadf >= res.adf
        i = int(np.argmax(res.bsadf))
        assert res.gsadf_window == (int(res.bsadf_start[i]), res.w0 + i)

    def test_argmax_ties_take_first_window(self):
        bs = np.array([0.5, 2.0, 1.0, 2.0])
        start0 = np.array([0, 3, 1, 0])
        anchored = np.array([0.5, 1.5, 1.5, -1.0])
        adf, sup_adf, g, sadf_r2, gwin, T = summarize(bs, start0, anchored, 10)
        assert (g, gwin) == (2.0, (4, 11))
        assert (sup_adf, sadf_r2) == (1.5, 11)
        assert (adf, T) == (-1.0, 13)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-1e3, 1e3))
    def test_shift_invariance(self, seed, c):
        y = random_walk(seed, 120)
        a = recursive_test(y)
        b = recursive_test(y + c)
        np.testing.assert_allclose(a.bsadf, b.bsadf, rtol=0, atol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(40, 140), st.integers(1, 40))
    def test_sadf_monotone_under_extension(self, seed, T, extra):
        y = random_walk(seed, T + extra)
        policy = WindowPolicy.explicit(20)
        # centering by the sample mean moves rounding in the shared windows
        assert sadf(y, policy)[0] >= sadf(y[:T], policy)[0] - 1e-9

    def test_bit_identical_reruns(self):
        y = random_walk(9, 300)
        a, b = recursive_test(y), recursive_test(y.copy())
        assert a.bsadf.tobytes() == b.bsadf.tobytes()
        assert (a.adf, a.sadf, a.gsadf) == (b.adf, b.sadf, b.gsadf)

    def test_singular_windows_skipped(self):
        y = random_walk(10, 120)
        y[:30] = 0.0
        res = recursive_test(y, WindowPolicy.explicit(20))
        assert res.n_singular > 0
        assert np.isneginf(res.bsadf[:11]).all()
        assert np.isfinite(res.gsadf)

    def test_all_singular(self):
        with pytest.raises(SingularDesign):
            recursive_test(np.full(60, 1.0), WindowPolicy.explicit(20))

    def test_json_round_trip(self):
        res = recursive_test(random_walk(11, 100))
        obj = json.loads(json.dumps(res.to_json()))
        back = RecursiveResult.from_json(obj)
        np.testing.assert_array_equal(back.bsadf, res.bsadf)
        assert back.gsadf_window == res.gsadf_window
        assert obj["bsadf"][0][0] == res.w0


class TestPowerExamples:
    def test_sadf_argmax_follows_explosive_half(self):
        hits = 0
        for seed in range(200):
            y, _ = generate(BubbleDgpConfig(T=200, alpha=1 / 1.04, bubble_windows=((101, 100),), seed=seed))
            res = recursive_test(y)
            assert res.sadf >= res.adf
            hits += res.sadf_window[1] >= 101
        assert hits / 200 >= 0.90

    def test_gsadf_argmax_overlaps_a_bubble(self):
        windows = ((61, 60), (181, 60))
        hits = 0
        for seed in range(200):
            y, _ = generate(BubbleDgpConfig(T=300, alpha=1 / 1.04, bubble_windows=windows, seed=seed))
            r1, r2 = recursive_test(y).gsadf_window
            hits += any(r1 <= s + n - 1 and r2 >= s for s, n in windows)
        assert hits / 200 >= 0.90
