from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearqc.bootstrap import (
    BootstrapConfig,
    GapMethod,
    bootstrap_spread,
    compute_metrics,
    gap_budget,
    induce_gaps,
    median_tod_impute,
    parse_method,
    records_to_csv,
    substream,
    tod_imputer,
)
from wearqc.errors import EmptyWindowError, GapPlacementError, ImputationError, InvalidParameterError
from wearqc.signal import BinarySeries, MaskedSignal, UniformSignal

MIDNIGHT = 1585699200.0
METHODS = [GapMethod("single_block"), GapMethod("multi_block", n_blocks=3),
           GapMethod("multi_block", block_range=(1, 5)), GapMethod("random_points")]


def series(x, start=MIDNIGHT, rate=1.0):
    return UniformSignal(start, rate, np.asarray(x, float), "")


def runs_of_invalid(valid):
    d = np.diff(np.concatenate([[0], (~valid).astype(np.int8), [0]]))
    return np.flatnonzero(d == -1) - np.flatnonzero(d == 1)


class TestMethod:
    @pytest.mark.parametrize("text", ["single_block", "random_points", "multi_block:3", "multi_block:1..5"])
    def test_round_trip(self, text):
        assert str(parse_method(text)) == text

    @pytest.mark.parametrize("text", ["multi_block", "multi_block:0", "multi_block:5..2", "blocks"])
    def test_rejects(self, text):
        with pytest.raises(InvalidParameterError):
            parse_method(text)

    def test_config_canonical(self):
        cfg = BootstrapConfig(retention_ratios=(0.6, 0.9, 0.9), method="multi_block:2")
        assert cfg.retention_ratios == (0.9, 0.6) and cfg.method.n_blocks == 2
        for bad in [dict(retention_ratios=(0.0,)), dict(retention_ratios=(1.1,)), dict(iterations=0),
                    dict(metrics=("median",)), dict(metrics=())]:
            with pytest.raises(InvalidParameterError):
                BootstrapConfig(**bad)


class TestInduce:
    def test_identity_at_one(self, rng):
        x = series(rng.random(50))
        for m in METHODS:
            out = induce_gaps(x, 1.0, m, rng)
            assert out.valid.values.all() and out.signal is x

    def test_single_block_example(self, rng):
        out = induce_gaps(series(np.arange(100)), 0.6, GapMethod("single_block"), rng)
        assert runs_of_invalid(out.valid.values).tolist() == [40]

    def test_random_points_count(self, rng):
        out = induce_gaps(series(np.zeros(1000)), 0.5, GapMethod("random_points"), rng)
        assert abs(out.valid.values.sum() - 500) <= 1
        assert len(runs_of_invalid(out.valid.values)) > 50

    def test_exact_block_count(self, rng):
        for _ in range(200):
            out = induce_gaps(series(np.zeros(300)), 0.7, GapMethod("multi_block", n_blocks=4), rng)
            assert len(runs_of_invalid(out.valid.values)) == 4

    def test_range_truncated_and_infeasible(self, rng):
        # 3 gap samples out of 4 admit at most 2 separated blocks
        out = induce_gaps(series(np.zeros(4)), 0.25, GapMethod("multi_block", block_range=(1, 9)), rng)
        assert out.valid.values.sum() == 1
        with pytest.raises(GapPlacementError):
            induce_gaps(series(np.zeros(4)), 0.25, GapMethod("multi_block", n_blocks=3), rng)

    def test_uniform_placement(self):
        # n=5, gap=2, two separated blocks: C(4, 2) = 6 equally likely layouts
        rng = np.random.default_rng(11)
        seen = {}
        for _ in range(6000):
            v = induce_gaps(series(np.zeros(5)), 0.6, GapMethod("multi_block", n_blocks=2), rng).valid.values
            seen[tuple(v)] = seen.get(tuple(v), 0) + 1
        assert len(seen) == 6
        assert all(abs(c - 1000) < 150 for c in seen.values())

    def test_budget_rounding(self):
        assert gap_budget(100, 0.6) == 40
        assert gap_budget(3, 0.5) == 1  # 1.5 kept rounds up to 2
        with pytest.raises(InvalidParameterError):
            gap_budget(10, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(1, 2000), st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
    def test_budget_all_methods(self, n, ratio, seed):
        rng = np.random.default_rng(seed)
        x = series(np.arange(n))
        for m in METHODS:
            try:
                out = induce_gaps(x, ratio, m, rng)
            except GapPlacementError:
                assert m.n_blocks == 3
                continue
            assert abs(out.valid.values.sum() - ratio * n) <= 1
            assert np.array_equal(out.signal.channel(), np.arange(n))
            if m.kind == "single_block":
                assert len(runs_of_invalid(out.valid.values)) <= 1

    def test_substream_stable(self):
        a = substream(7, "s", 0.6, 3).random(4)
        assert np.array_equal(a, substream(7, "s", 0.6, 3).random(4))
        assert not np.array_equal(a, substream(7, "s", 0.6, 4).random(4))
        assert not np.array_equal(a, substream(8, "s", 0.6, 3).random(4))


class TestMetrics:
    def test_closed_form(self):
        x = series(np.arange(1, 101))
        m = compute_metrics(MaskedSignal.all_valid(x), ["p50", "mean", "p75"])
        assert m == {"p50": 50.5, "mean": 50.5, "p75": 75.25}

    def test_upper_half_masked(self):
        x = series(np.arange(1, 101))
        v = np.arange(100) < 50
        assert compute_metrics(MaskedSignal(x, BinarySeries(x.start, 1.0, v)), ["mean"])["mean"] == 25.5

    def test_constant_any_mask(self, rng):
        x = series(np.full(60, 3.25))
        v = rng.random(60) < 0.3
        v[0] = True
        assert set(compute_metrics(MaskedSignal(x, BinarySeries(x.start, 1.0, v)), ["p50", "p75", "mean"]).values()) == {3.25}

    def test_empty_error(self):
        x = series(np.ones(5))
        with pytest.raises(EmptyWindowError):
            compute_metrics(MaskedSignal(x, BinarySeries(x.start, 1.0, np.zeros(5, bool))), ["mean"])

    def test_all_valid_matches_direct(self, rng):
        x = rng.random(333)
        m = compute_metrics(MaskedSignal.all_valid(series(x)), ["p50", "p75", "mean"])
        assert m == {"p50": float(np.percentile(x, 50)), "p75": float(np.percentile(x, 75)), "mean": float(np.mean(x))}


class TestSpread:
    def test_record_count_and_identity(self, rng):
        ref = series(rng.random(600))
        recs = bootstrap_spread(ref, BootstrapConfig(retention_ratios=(1.0, 0.9, 0.75, 0.6), iterations=25))
        assert len(recs) == 4 * 25 * 3
        assert all(r.value == r.reference_value for r in recs if r.retention_ratio == 1.0)
        cfg = BootstrapConfig(iterations=100)
        assert len(bootstrap_spread(ref, cfg)) == 900

    def test_jobs_invariant(self, rng):
        ref = series(rng.random(400))
        cfg = BootstrapConfig(iterations=30, seed=7, method="multi_block:1..5")
        a = records_to_csv(bootstrap_spread(ref, cfg, jobs=1))
        b = records_to_csv(bootstrap_spread(ref, cfg, jobs=4))
        assert a == b

    def test_iqr_grows_as_retention_falls(self):
        ref = series(np.random.default_rng(5).random(3600))
        recs = bootstrap_spread(ref, BootstrapConfig(retention_ratios=(0.9, 0.6), iterations=200,
                                                     metrics=("p50",), method="multi_block:1..5", seed=1))

        def iqr(q):
            v = [r.value for r in recs if r.retention_ratio == q]
            return np.subtract(*np.percentile(v, [75, 25]))
        assert iqr(0.6) >= iqr(0.9)

    def test_csv_round_trip(self, rng):
        recs = bootstrap_spread(series(rng.random(50)), BootstrapConfig(iterations=2))
        lines = records_to_csv(recs).splitlines()
        assert lines[0] == "series_id,metric,retention_ratio,iteration,value,reference_value"
        assert float(lines[1].split(",")[4]) == recs[0].value


def day_profile(value_fn, n_days=3):
    """Per-minute profile days starting at UTC midnights."""
    out = []
    for d in range(n_days):
        t = np.arange(1440)
        x = series(value_fn(d, t), start=MIDNIGHT + d * 86400, rate=1 / 60)
        out.append(MaskedSignal.all_valid(x))
    return out


class TestImpute:
    def test_identity_without_gaps(self, rng):
        x = series(rng.random(100))
        assert median_tod_impute(MaskedSignal.all_valid(x), []) is x

    def test_gap_filled_with_bin_median(self):
        # 14:00-14:30 bin is 0.6, 0.7, 0.8 across three days -> median 0.7
        prof = day_profile(lambda d, t: np.where((t >= 840) & (t < 870), 0.6 + 0.1 * d, 5.0))
        target = series(np.full(1440, 2.0), start=MIDNIGHT + 10 * 86400, rate=1 / 60)
        v = np.ones(1440, bool)
        v[840:870] = False
        out = median_tod_impute(MaskedSignal(target, BinarySeries(target.start, target.rate_hz, v)), prof)
        y = out.channel()
        assert np.allclose(y[840:870], 0.7) and np.all(y[v] == 2.0)

    def test_constant_profile(self):
        prof = day_profile(lambda d, t: np.full(t.size, 4.5))
        target = series(np.zeros(1440), start=MIDNIGHT + 5 * 86400, rate=1 / 60)
        v = np.random.default_rng(0).random(1440) < 0.5
        out = median_tod_impute(MaskedSignal(target, BinarySeries(target.start, target.rate_hz, v)), prof)
        assert np.all(out.channel()[~v] == 4.5)

    def test_empty_bin_named(self):
        prof = [MaskedSignal.all_valid(series(np.ones(60), start=MIDNIGHT, rate=1 / 60))]  # 00:00-01:00 only
        target = series(np.zeros(1440), start=MIDNIGHT, rate=1 / 60)
        v = np.ones(1440, bool)
        v[840:845] = False
        with pytest.raises(ImputationError, match="14:00-14:30"):
            median_tod_impute(MaskedSignal(target, BinarySeries(target.start, target.rate_hz, v)), prof)

    def test_composes_with_bootstrap(self):
        prof = day_profile(lambda d, t: np.sin(t / 200.0) + d)
        ref = series(np.sin(np.arange(1440) / 200.0) + 1, start=MIDNIGHT + 7 * 86400, rate=1 / 60)
        cfg = BootstrapConfig(iterations=5, retention_ratios=(1.0, 0.6))
        gap_only = bootstrap_spread(ref, cfg)
        imputed = bootstrap_spread(ref, cfg, imputer=tod_imputer(prof))
        assert [(r.metric, r.retention_ratio, r.iteration) for r in gap_only] == \
               [(r.metric, r.retention_ratio, r.iteration) for r in imputed]
        assert all(r.value == r.reference_value for r in imputed if r.retention_ratio == 1.0)
