from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearqc.errors import AlignmentError, InvalidParameterError
from wearqc.intervals import IntervalSet
from wearqc.signal import (
    BinarySeries,
    MaskedSignal,
    UniformSignal,
    _std_at,
    combine,
    from_intervals,
    reindex_hold,
    rolling_mean,
    rolling_std,
    smooth_majority,
    threshold,
    to_intervals,
)


def brute_rolling_std(x, w):
    n = len(x)
    if n < w:
        return np.full(n, np.std(x))
    out = np.array([np.std(x[i - w + 1 : i + 1]) for i in range(w - 1, n)])
    return np.concatenate([np.full(w - 1, out[0]), out])


class TestTypes:
    def test_rejects_nan_and_bad_rate(self):
        with pytest.raises(InvalidParameterError):
            UniformSignal(0, 4, [1.0, np.nan])
        with pytest.raises(InvalidParameterError):
            UniformSignal(0, 0, [1.0])
        with pytest.raises(InvalidParameterError):
            UniformSignal(0, 4, np.zeros((3, 4)))

    def test_time_model(self):
        s = UniformSignal(100.0, 4.0, np.arange(8.0))
        assert np.array_equal(s.times(), 100.0 + np.arange(8) / 4.0)
        assert s.end == 102.0
        assert not s.samples.flags.writeable

    def test_masked_alignment(self):
        s = UniformSignal(0, 4, np.zeros(4))
        with pytest.raises(AlignmentError):
            MaskedSignal(s, BinarySeries(0, 4, [True] * 3))
        assert MaskedSignal.all_valid(s).valid_fraction == 1.0


class TestRollingStd:
    def test_examples(self):
        assert np.all(rolling_std(UniformSignal(0, 4, [5.0] * 4), 0.5).channel() == 0.0)
        assert rolling_std(UniformSignal(0, 2, [0.0, 2.0]), 1.0).channel()[-1] == 1.0

    def test_window_too_short(self):
        with pytest.raises(InvalidParameterError):
            rolling_std(UniformSignal(0, 32, np.zeros(64)), 1 / 32)

    def test_one_second_at_32hz_uses_32_samples(self, rng):
        x = rng.normal(size=200)
        out = rolling_std(UniformSignal(0, 32, x), 1.0).channel()
        assert out[100] == pytest.approx(np.std(x[69:101]), abs=1e-12)

    @pytest.mark.parametrize("w,scale,offset", [(2, 1.0, 0.0), (32, 0.1, 1.0), (320, 3.0, -50.0), (7, 1e-3, 1e4)])
    def test_matches_brute_force(self, rng, w, scale, offset):
        x = offset + scale * rng.normal(size=9000)
        x[3000:3500] = offset  # constant stretch
        got = rolling_std(UniformSignal(0, 1, x), float(w)).channel()
        assert np.allclose(got, brute_rolling_std(x, w), rtol=0, atol=1e-9 * max(scale, 1e-12) + 1e-12)
        assert np.all(got[3000 + w - 1 : 3500] == 0.0)

    def test_quantized_counts_exact_zero_and_accuracy(self, rng):
        # device-like data: whole counts / 64 with long still stretches
        x = np.round(rng.normal(0, 3, 20000)) / 64 + 1.0
        x[5000:9000] = 1.0
        got = rolling_std(UniformSignal(0, 32, x), 1.0).channel()
        assert np.max(np.abs(got - brute_rolling_std(x, 32))) < 1e-9
        assert np.all(got[5031:9000] == 0.0)

    def test_short_signal(self):
        out = rolling_std(UniformSignal(0, 32, [0.0, 2.0, 4.0]), 1.0).channel()
        assert np.allclose(out, np.std([0.0, 2.0, 4.0]))

    def test_subset_evaluation_bit_identical(self, rng):
        x = rng.normal(size=12345)
        full = rolling_std(UniformSignal(0, 32, x), 1.0).channel()
        idx = np.sort(rng.choice(x.size, 777, replace=False))
        assert np.array_equal(_std_at(x, 32, idx), full[idx])


class TestRollingMean:
    def test_examples(self):
        assert np.all(rolling_mean(BinarySeries(0, 4, [True] * 8), 1.0).channel() == 1.0)
        assert rolling_mean(BinarySeries(0, 4, [True, False, False, False]), 1.0).channel()[-1] == 0.25

    def test_matches_brute_force(self, rng):
        x = rng.normal(size=1000)
        got = rolling_mean(UniformSignal(0, 4, x), 60.0).channel()
        want = [x[max(0, i - 239) : i + 1].mean() for i in range(1000)]
        assert np.allclose(got, want, atol=1e-12)

    def test_empty(self):
        assert len(rolling_mean(UniformSignal(0, 4, np.empty(0)), 1.0)) == 0


class TestThresholdCombine:
    def test_examples(self):
        assert threshold(UniformSignal(0, 4, [33.0] * 4), ">=", 32).values.all()
        assert not threshold(UniformSignal(0, 4, [0.0] * 4), ">=", 0.03).values.any()
        assert not threshold(UniformSignal(0, 4, [20.0] * 4), "within", (25, 40)).values.any()
        assert threshold(UniformSignal(0, 4, [25.0, 40.0]), "within", (25, 40)).values.all()
        with pytest.raises(InvalidParameterError):
            threshold(UniformSignal(0, 4, [1.0]), "within", (40, 25))

    def test_combine(self):
        f, t = False, True
        assert combine([BinarySeries(0, 1, [f, f]), BinarySeries(0, 1, [f, t])], "or").values.tolist() == [f, t]
        assert combine([BinarySeries(0, 1, [t, t]), BinarySeries(0, 1, [t, f])], "and").values.tolist() == [t, f]
        with pytest.raises(AlignmentError):
            combine([BinarySeries(0, 1, [t]), BinarySeries(0, 2, [t])])


class TestReindex:
    def test_staircase_example(self):
        out = reindex_hold(BinarySeries(0, 1, [True, False]), BinarySeries(0, 4, [False] * 8))
        assert out.values.tolist() == [True] * 4 + [False] * 4

    def test_identity(self, rng):
        s = BinarySeries(5.0, 4, rng.random(100) < 0.5)
        assert reindex_hold(s, s) == s

    def test_32hz_onto_4hz(self, rng):
        src = BinarySeries(0, 32, rng.random(320) < 0.5)
        out = reindex_hold(src, BinarySeries(0, 4, np.zeros(40, bool)))
        assert out.rate_hz == 4.0 and len(out) == 40
        assert np.array_equal(out.values, src.values[::8])

    def test_stale_evidence_is_false(self):
        # source covers [0, 2); target runs to 4 s at 4 Hz: beyond 2 source periods -> False
        out = reindex_hold(BinarySeries(0, 1, [True, True]), BinarySeries(0, 4, np.zeros(16, bool)))
        assert out.values[:12].all() and not out.values[13:].any()

    def test_errors(self):
        with pytest.raises(AlignmentError):
            reindex_hold(BinarySeries(0, 1, []), BinarySeries(0, 4, [True]))
        with pytest.raises(AlignmentError):
            reindex_hold(BinarySeries(0, 1, [True]), BinarySeries(100, 4, [True]))


bools = st.lists(st.booleans(), min_size=1, max_size=300)


class TestSmoothMajority:
    def test_constant_unchanged(self):
        s = BinarySeries(0, 4, [True] * 500)
        assert smooth_majority(s, 60) == s

    def test_short_false_run_removed(self):
        v = np.ones(480, bool)
        v[200:220] = False  # 5 s at 4 Hz
        assert smooth_majority(BinarySeries(0, 4, v), 60).values.all()

    @settings(max_examples=300, deadline=None)
    @given(bools, st.integers(1, 12))
    def test_idempotent_and_run_bound(self, v, k):
        s = BinarySeries(0, 1, v)
        once = smooth_majority(s, 2 * k)
        assert smooth_majority(once, 2 * k) == once
        vals = once.values
        cuts = np.flatnonzero(np.diff(vals.astype(np.int8))) + 1
        runs = np.diff(np.concatenate([[0], cuts, [vals.size]]))
        # interior runs are at least k+1 samples long
        assert np.all(runs[1:-1] >= k + 1)

    @settings(max_examples=300, deadline=None)
    @given(bools, st.integers(1, 12))
    def test_true_only_near_original_true(self, v, k):
        v = np.array(v)
        out = smooth_majority(BinarySeries(0, 1, v), 2 * k).values
        idx = np.flatnonzero(v)
        near = np.array([idx.size > 0 and np.min(np.abs(idx - i)) <= k for i in range(v.size)], bool)
        assert not np.any(out & ~near)

    @settings(max_examples=200, deadline=None)
    @given(bools, bools, st.integers(1, 8))
    def test_monotone(self, a, b, k):
        n = min(len(a), len(b))
        x = np.array(a[:n])
        y = x | np.array(b[:n])
        sx = smooth_majority(BinarySeries(0, 1, x), 2 * k).values
        sy = smooth_majority(BinarySeries(0, 1, y), 2 * k).values
        assert not np.any(sx & ~sy)


class TestIntervals:
    def test_examples(self):
        assert to_intervals(BinarySeries(0, 1, [False] * 3)) == IntervalSet()
        assert to_intervals(BinarySeries(10, 1, [True, True, False, True])).to_list() == [[10, 12], [13, 14]]
        v = np.array([True] * 45 + [False] * 10 + [True] * 70)
        assert to_intervals(BinarySeries(0, 1, v), 60).to_list() == [[55.0, 125.0]]

    @settings(max_examples=200, deadline=None)
    @given(bools, st.sampled_from([1.0, 4.0, 32.0]), st.floats(1e9, 2e9))
    def test_round_trip(self, v, rate, start):
        s = BinarySeries(start, rate, v)
        assert from_intervals(to_intervals(s), s) == s
