"""SQI-driven EDA artifact processing.

The EDA SQI is the AND of a range sub-SQI and a noise sub-SQI. Noise
amplitude is the absolute residual of the signal around a short centered
rolling median, averaged over a trailing two-second window. Processing then
repairs short, infrequent invalid runs by linear interpolation and drops
valid segments too short to analyse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AlignmentError, InvalidParameterError
from .signal import BinarySeries, MaskedSignal, UniformSignal, _runs, rolling_mean

__all__ = [
    "EdaQualityConfig",
    "noise_amplitude",
    "eda_sub_sqis",
    "eda_sqi",
    "process_eda",
]


@dataclass(frozen=True)
class EdaQualityConfig:
    range_min_us: float = 0.03
    range_max_us: float = 100.0
    noise_window_s: float = 2.0
    noise_threshold_us: float = 0.1
    lowpass_median_window_s: float = 1.0
    max_interp_gap_s: float = 5.0
    min_segment_s: float = 60.0
    # runs are interpolated only where at most this many invalid runs start per window
    max_interp_runs: int = 3
    interp_frequency_window_s: float = 60.0

    def __post_init__(self):
        for name in ("range_min_us", "range_max_us", "noise_window_s", "noise_threshold_us",
                     "lowpass_median_window_s", "max_interp_gap_s", "min_segment_s",
                     "interp_frequency_window_s"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.range_min_us > self.range_max_us:
            raise InvalidParameterError("range_min_us exceeds range_max_us")
        if not self.max_interp_gap_s < self.min_segment_s:
            raise InvalidParameterError("max_interp_gap_s must be below min_segment_s")
        if self.max_interp_runs < 0:
            raise InvalidParameterError("max_interp_runs must be >= 0")


def _centered_median(x: np.ndarray, w: int) -> np.ndarray:
    """Median over ``x[i - w//2 : i + (w-1)//2 + 1]``, truncated at the ends."""
    n = x.size
    before, after = w // 2, (w - 1) // 2
    out = np.empty(n)
    if n >= w:
        out[before : n - after] = np.median(sliding_window_view(x, w), axis=1)
    for i in list(range(min(before, n))) + list(range(max(before, n - after), n)):
        out[i] = np.median(x[max(0, i - before) : i + after + 1])
    return out


def noise_amplitude(eda: UniformSignal, cfg: EdaQualityConfig | None = None) -> UniformSignal:
    cfg = cfg or EdaQualityConfig()
    x = eda.channel(0)
    w = max(1, int(round(cfg.lowpass_median_window_s * eda.rate_hz)))
    if x.size < w:
        return UniformSignal(eda.start, eda.rate_hz, np.empty(0), eda.unit)
    residual = np.abs(x - _centered_median(x, w))
    return rolling_mean(UniformSignal(eda.start, eda.rate_hz, residual, eda.unit), cfg.noise_window_s)


def eda_sub_sqis(eda: UniformSignal, cfg: EdaQualityConfig | None = None):
    """Range and noise sub-SQIs plus the noise amplitude they derive from."""
    cfg = cfg or EdaQualityConfig()
    x = eda.channel(0)
    in_range = (x >= cfg.range_min_us) & (x <= cfg.range_max_us)
    amp = noise_amplitude(eda, cfg)
    if len(amp) == len(eda):
        quiet = amp.channel(0) <= cfg.noise_threshold_us
    else:
        quiet = np.zeros(len(eda), dtype=bool)
    return (
        BinarySeries(eda.start, eda.rate_hz, in_range),
        BinarySeries(eda.start, eda.rate_hz, quiet),
        amp,
    )


def eda_sqi(eda: UniformSignal, cfg: EdaQualityConfig | None = None) -> BinarySeries:
    range_sqi, noise_sqi, _ = eda_sub_sqis(eda, cfg)
    return BinarySeries(eda.start, eda.rate_hz, range_sqi.values & noise_sqi.values)


def _sparse(starts_s: np.ndarray, max_runs: int, window_s: float) -> np.ndarray:
    """True for runs whose start lies in no ``window_s`` span holding more than
    ``max_runs`` run starts."""
    n = starts_s.size
    ok = np.ones(n, dtype=bool)
    m = max_runs + 1
    if n < m:
        return ok
    # consecutive groups of max_runs+1 starts packed closer than window_s
    dense = starts_s[m - 1 :] - starts_s[: n - m + 1] < window_s - 1e-9
    for i in np.flatnonzero(dense):
        ok[i : i + m] = False
    return ok


def process_eda(eda: UniformSignal, sqi: BinarySeries, cfg: EdaQualityConfig | None = None) -> MaskedSignal:
    """Interpolate brief invalid runs, then drop short valid segments.

    An invalid run is interpolated when it lasts at most ``max_interp_gap_s``,
    has valid samples on both sides, and is infrequent: no span of
    ``interp_frequency_window_s`` containing its start holds more than
    ``max_interp_runs`` invalid-run starts. Frequency counts every invalid run,
    whatever its length, so shrinking ``max_interp_gap_s`` can only shrink the
    retained data. Values outside interpolated runs are never modified.
    """
    cfg = cfg or EdaQualityConfig()
    if not eda.timebase.matches(sqi.timebase):
        raise AlignmentError("EDA signal and SQI must share a timebase")
    x = np.array(eda.channel(0), dtype=float)
    valid = np.array(sqi.values, dtype=bool)
    n = x.size
    rate = eda.rate_hz

    first, stop = _runs(~valid)
    bracketed = (first > 0) & (stop < n)
    short = (stop - first) / rate <= cfg.max_interp_gap_s + 1e-9
    sparse = _sparse(first / rate, cfg.max_interp_runs, cfg.interp_frequency_window_s)
    for r in np.flatnonzero(bracketed & short & sparse):
        a, b = first[r], stop[r]
        left, right = x[a - 1], x[b]
        frac = np.arange(1, b - a + 1) / (b - a + 1)
        x[a:b] = left + (right - left) * frac
        valid[a:b] = True

    seg_first, seg_stop = _runs(valid)
    for a, b in zip(seg_first, seg_stop):
        if (b - a) / rate < cfg.min_segment_s - 1e-9:
            valid[a:b] = False

    return MaskedSignal(
        UniformSignal(eda.start, rate, x, eda.unit), BinarySeries(eda.start, rate, valid)
    )
