"""Wrist non-wear detection from E4 movement, skin temperature and conductance.

Two detectors share the same output type:

* :func:`bottcher_nonwear` -- the reference on-body score: per-axis 10 s
  ACC SDs summed across axes, a 25-40 degC temperature band and a
  0.05 uS conductance floor, each reduced to one flag per minute (on-body
  when at least 1 % of the minute passes), then OR-combined.
* :func:`refined_nonwear` -- x-axis ACC SD over 1 s, a 32 degC temperature
  floor and a 0.03 uS conductance floor. The sub-SQIs are held onto the
  4 Hz EDA timebase, OR-combined and majority-smoothed over one minute,
  which keeps the 0.25 s granularity.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, InvalidParameterError, RecordingError
from .ingest import E4Session
from .intervals import IntervalSet
from .signal import (
    BinarySeries,
    _hold_plan,
    _std_at,
    _window_samples,
    combine,
    reindex_hold,
    rolling_std,
    smooth_majority,
    threshold,
    to_intervals,
)

__all__ = [
    "RefinedConfig",
    "BottcherConfig",
    "WristSqiResult",
    "refined_nonwear",
    "bottcher_nonwear",
    "BenchmarkResult",
    "benchmark_nonwear",
]


@dataclass(frozen=True)
class RefinedConfig:
    acc_sd_window_s: float = 1.0
    acc_sd_threshold_g: float = 0.1
    acc_axis: int = 0
    temp_min_c: float = 32.0
    eda_min_us: float = 0.03
    smooth_window_s: float = 60.0
    min_bout_s: float = 0.0

    def __post_init__(self):
        for name in ("acc_sd_window_s", "acc_sd_threshold_g", "temp_min_c", "eda_min_us",
                     "smooth_window_s"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.acc_axis not in (0, 1, 2):
            raise InvalidParameterError("acc_axis must be 0, 1 or 2")
        if self.min_bout_s < 0:
            raise InvalidParameterError("min_bout_s must be >= 0")


@dataclass(frozen=True)
class BottcherConfig:
    acc_sd_window_s: float = 10.0
    acc_sdsum_threshold_g: float = 0.2
    temp_range_c: tuple[float, float] = (25.0, 40.0)
    eda_min_us: float = 0.05
    minute_onbody_fraction: float = 0.01
    bin_s: float = 60.0
    min_bout_s: float = 0.0

    def __post_init__(self):
        lo, hi = self.temp_range_c
        if not 0 < lo <= hi:
            raise InvalidParameterError(f"temp_range_c must satisfy 0 < lo <= hi, got {self.temp_range_c}")
        for name in ("acc_sd_window_s", "acc_sdsum_threshold_g", "eda_min_us",
                     "minute_onbody_fraction", "bin_s"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class WristSqiResult:
    wrist_sqi: BinarySeries
    sub_sqis: dict[str, BinarySeries] = field(default_factory=dict)
    wear_intervals: IntervalSet = field(default_factory=IntervalSet)

    @property
    def wear_fraction(self) -> float:
        v = self.wrist_sqi.values
        return float(v.mean()) if v.size else 0.0


def _require_overlap(session: E4Session):
    if session.acc is None or session.eda is None or session.temp is None:
        raise RecordingError("non-wear detection needs acc, eda and temp")
    lo = max(s.start for s in (session.acc, session.eda, session.temp))
    hi = min(s.end for s in (session.acc, session.eda, session.temp))
    if hi <= lo:
        raise AlignmentError("acc, eda and temp do not overlap in time")


def refined_nonwear(session: E4Session, cfg: RefinedConfig | None = None) -> WristSqiResult:
    """Refined wrist SQI at the EDA sample rate.

    Returns
    -------
    WristSqiResult
        ``sub_sqis`` are the three pre-smoothing SQIs on the EDA timebase.
    """
    cfg = cfg or RefinedConfig()
    _require_overlap(session)
    acc, eda, temp = session.acc, session.eda, session.temp
    target = eda.timebase

    # The x-axis SD is only ever read at the held EDA timestamps, so it is
    # evaluated there alone; values equal rolling_std -> threshold -> reindex_hold.
    w = _window_samples(cfg.acc_sd_window_s, acc.rate_hz)
    if w < 2:
        raise InvalidParameterError("acc_sd_window_s must cover at least 2 ACC samples")
    idx, fresh = _hold_plan(acc.timebase, target)
    movement = np.zeros(target.n, dtype=bool)
    if fresh.any():
        x = np.ascontiguousarray(acc.channel(cfg.acc_axis))
        movement[fresh] = _std_at(x, w, idx[fresh]) >= cfg.acc_sd_threshold_g
    movement_sqi = BinarySeries(target.start, target.rate_hz, movement)

    temp_sqi = reindex_hold(threshold(temp, ">=", cfg.temp_min_c), target)
    eda_sqi = threshold(eda, ">=", cfg.eda_min_us)

    combined = combine([movement_sqi, temp_sqi, eda_sqi], "or")
    wrist = smooth_majority(combined, cfg.smooth_window_s)
    return WristSqiResult(
        wrist_sqi=wrist,
        sub_sqis={"movement": movement_sqi, "temperature": temp_sqi, "eda": eda_sqi},
        wear_intervals=to_intervals(wrist, cfg.min_bout_s),
    )


def _per_bin_onbody(sqi: BinarySeries, origin: float, bin_s: float, n_bins: int,
                    fraction: float) -> np.ndarray:
    """Bin flag: at least ``fraction`` of the bin's samples are on-body."""
    if len(sqi) == 0:
        return np.zeros(n_bins, dtype=bool)
    t = (sqi.start - origin) + np.arange(len(sqi)) / sqi.rate_hz
    b = np.floor(t / bin_s + 1e-9).astype(np.int64)
    inside = (b >= 0) & (b < n_bins)
    b = b[inside]
    counts = np.bincount(b, minlength=n_bins)
    hits = np.bincount(b, weights=sqi.values[inside], minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = hits / counts
    return (counts > 0) & (frac >= fraction)


def bottcher_nonwear(session: E4Session, cfg: BottcherConfig | None = None) -> WristSqiResult:
    """Reference on-body score with one flag per minute.

    Minute bins are aligned to the session start (the earliest modality).
    A trailing partial minute is scored over the samples it contains.
    """
    cfg = cfg or BottcherConfig()
    _require_overlap(session)
    acc, eda, temp = session.acc, session.eda, session.temp

    sd_sum = rolling_std(acc, cfg.acc_sd_window_s, 0).channel()
    for axis in range(1, acc.channels):
        sd_sum = sd_sum + rolling_std(acc, cfg.acc_sd_window_s, axis).channel()
    movement = BinarySeries(acc.start, acc.rate_hz, sd_sum >= cfg.acc_sdsum_threshold_g)
    temp_hi = threshold(temp, "within", cfg.temp_range_c)
    eda_hi = threshold(eda, ">=", cfg.eda_min_us)

    origin = session.start
    n_bins = max(1, math.ceil((session.end - origin) / cfg.bin_s - 1e-9))
    rate = 1.0 / cfg.bin_s
    subs = {
        name: BinarySeries(origin, rate, _per_bin_onbody(s, origin, cfg.bin_s, n_bins,
                                                         cfg.minute_onbody_fraction))
        for name, s in (("movement", movement), ("temperature", temp_hi), ("eda", eda_hi))
    }
    wrist = combine(list(subs.values()), "or")
    wear = to_intervals(wrist, cfg.min_bout_s).clip(session.start, session.end)
    return WristSqiResult(wrist_sqi=wrist, sub_sqis=subs, wear_intervals=wear)


ALGORITHMS = {"refined": refined_nonwear, "bottcher": bottcher_nonwear}


@dataclass(frozen=True)
class BenchmarkResult:
    algorithm: str
    hours: float
    repetitions: int
    ms_per_hour: tuple[float, ...]

    @property
    def median_ms_per_hour(self) -> float:
        return statistics.median(self.ms_per_hour)


def benchmark_nonwear(hours: float = 24.0, algorithm: str = "refined", seed: int = 0,
                      repetitions: int = 10, session: E4Session | None = None) -> BenchmarkResult:
    """Median wall time per hour of data, excluding data generation/ingestion.

    One untimed warm-up run precedes the timed repetitions.
    """
    if hours < 1:
        raise InvalidParameterError("benchmark needs hours >= 1")
    if repetitions < 1:
        raise InvalidParameterError("repetitions must be >= 1")
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise InvalidParameterError(f"unknown algorithm {algorithm!r}") from None
    if session is None:
        from .synthetic import synthetic_session

        session = synthetic_session(hours, seed).session
    fn(session)
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn(session)
        samples.append((time.perf_counter() - t0) * 1000.0 / hours)
    return BenchmarkResult(algorithm, hours, repetitions, tuple(samples))
