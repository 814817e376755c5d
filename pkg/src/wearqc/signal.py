"""Uniformly sampled signals, boolean quality series and their algebra.

Time model: sample ``i`` of any series sits at ``start + i / rate_hz``
(seconds since the Unix epoch, UTC). Values are immutable after
construction; the underlying arrays are flagged read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AlignmentError, InvalidParameterError
from .intervals import IntervalSet

__all__ = [
    "Timebase",
    "UniformSignal",
    "BinarySeries",
    "MaskedSignal",
    "rolling_std",
    "rolling_mean",
    "threshold",
    "reindex_hold",
    "combine",
    "smooth_majority",
    "to_intervals",
    "from_intervals",
]

# tolerance, in samples, when mapping times onto sample indices
_INDEX_EPS = 1e-6
# absolute tolerance, in seconds, for two series to count as sharing a start
_START_TOL = 1e-6
_EPS = float(np.finfo(float).eps)
_SD_REL_TOL = 1e-11


def _window_samples(window_s: float, rate_hz: float) -> int:
    return int(math.floor(window_s * rate_hz + 1e-9))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Timebase:
    start: float
    rate_hz: float
    n: int

    def times(self) -> np.ndarray:
        return self.start + np.arange(self.n) / self.rate_hz

    @property
    def end(self) -> float:
        return self.start + self.n / self.rate_hz

    def matches(self, other: Timebase) -> bool:
        return (
            self.n == other.n
            and self.rate_hz == other.rate_hz
            and abs(self.start - other.start) <= _START_TOL
        )


@dataclass(frozen=True, eq=False)
class UniformSignal:
    """Fixed-rate signal with 1 to 3 channels.

    ``samples`` is stored as a read-only ``(n, channels)`` float array; a 1-D
    input is taken as a single channel.
    """

    start: float
    rate_hz: float
    samples: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        if not (math.isfinite(self.start)):
            raise InvalidParameterError("start time must be finite")
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise InvalidParameterError(f"rate_hz must be positive, got {self.rate_hz}")
        arr = np.array(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or not 1 <= arr.shape[1] <= 3:
            raise InvalidParameterError(
                f"samples must have shape (n,) or (n, 1..3), got {arr.shape}"
            )
        if np.isnan(arr).any():
            raise InvalidParameterError(
                "samples contain NaN; express invalid samples with a MaskedSignal"
            )
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        # column-major so that every channel is a contiguous 1-D view
        object.__setattr__(self, "samples", _frozen(np.asfortranarray(arr)))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def timebase(self) -> Timebase:
        return Timebase(self.start, self.rate_hz, len(self))

    @property
    def end(self) -> float:
        return self.timebase.end

    def times(self) -> np.ndarray:
        return self.timebase.times()

    def channel(self, index: int = 0) -> np.ndarray:
        if not 0 <= index < self.channels:
            raise InvalidParameterError(
                f"channel {index} out of range for {self.channels}-channel signal"
            )
        return self.samples[:, index]

    def slice(self, i0: int, i1: int) -> UniformSignal:
        i0 = max(0, i0)
        return UniformSignal(
            self.start + i0 / self.rate_hz, self.rate_hz, self.samples[i0:i1], self.unit
        )


@dataclass(frozen=True, eq=False)
class BinarySeries:
    """Uniform-rate boolean series; the representation of every SQI."""

    start: float
    rate_hz: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise InvalidParameterError(f"rate_hz must be positive, got {self.rate_hz}")
        arr = np.array(self.values, dtype=bool).reshape(-1)
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        object.__setattr__(self, "values", _frozen(arr))

    def __len__(self) -> int:
        return self.values.size

    @property
    def timebase(self) -> Timebase:
        return Timebase(self.start, self.rate_hz, len(self))

    @property
    def end(self) -> float:
        return self.timebase.end

    def times(self) -> np.ndarray:
        return self.timebase.times()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinarySeries):
            return NotImplemented
        return self.timebase.matches(other.timebase) and np.array_equal(
            self.values, other.values
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MaskedSignal:
    """A signal plus per-sample validity on the identical timebase."""

    signal: UniformSignal
    valid: BinarySeries

    def __post_init__(self):
        if not self.signal.timebase.matches(self.valid.timebase):
            raise AlignmentError("mask timebase differs from signal timebase")

    @classmethod
    def all_valid(cls, signal: UniformSignal) -> MaskedSignal:
        return cls(signal, BinarySeries(signal.start, signal.rate_hz, np.ones(len(signal), bool)))

    def __len__(self) -> int:
        return len(self.signal)

    @property
    def valid_fraction(self) -> float:
        n = len(self)
        return float(self.valid.values.sum()) / n if n else 0.0


def _as_timebase(target) -> Timebase:
    if isinstance(target, Timebase):
        return target
    return target.timebase


def _values_1d(series, channel: int = 0) -> np.ndarray:
    if isinstance(series, BinarySeries):
        return series.values.astype(float)
    return series.channel(channel)


# --------------------------------------------------------------------------
# rolling statistics


def _trailing_var(x: np.ndarray, w: int, ends: np.ndarray | None = None, block: int = 4096):
    """Population variance of ``x[e-w+1 : e+1]`` for each window end ``e``.

    ``ends`` must be sorted and lie in ``[w-1, n-1]``; ``None`` means every
    end. Windows are processed in blocks with sums re-anchored at each block
    start, which keeps the cancellation error of the one-pass formula small.
    Windows whose variance is too small for the one-pass formula's error
    bound are recomputed two-pass; exactly constant windows return 0.
    Evaluating a subset of ends gives bit-identical values to evaluating
    all of them.
    """
    n = x.size
    all_ends = ends is None
    if all_ends:
        out = np.empty(n - w + 1)
    else:
        out = np.empty(ends.size)

    c1 = np.empty(block + w)
    c2 = np.empty(block + w)
    c1[0] = c2[0] = 0.0
    offsets = np.arange(1 - w, 1)
    for a in range(w - 1, n, block):
        b = min(a + block, n)
        if all_ends:
            dst = slice(a - w + 1, b - w + 1)
        else:
            i0, i1 = np.searchsorted(ends, [a, b])
            if i0 == i1:
                continue
            dst = slice(i0, i1)
        lo = a - w + 1
        seg = x[lo:b] - x[lo]
        m = seg.size
        np.cumsum(seg, out=c1[1 : m + 1])
        np.cumsum(seg * seg, out=c2[1 : m + 1])
        if all_ends:
            s1 = c1[w : m + 1] - c1[: m + 1 - w]
            s2 = c2[w : m + 1] - c2[: m + 1 - w]
        else:
            k = ends[dst] - lo + 1
            s1 = c1[k] - c1[k - w]
            s2 = c2[k] - c2[k - w]
        mean = s1 / w
        var = s2 / w - mean * mean
        # windows whose SD could carry more than _SD_REL_TOL * range of rounding error
        span = max(float(seg.max()), -float(seg.min()))
        sd_floor = 4 * _EPS * m * span / (w * _SD_REL_TOL)
        low = var < sd_floor * sd_floor
        if low.any():
            e = (np.arange(a, b) if all_ends else ends[dst])[low]
            rows = x[e[:, None] + offsets]
            dev = rows - rows.mean(axis=1, keepdims=True)
            exact = (dev * dev).mean(axis=1)
            exact[rows.max(axis=1) == rows.min(axis=1)] = 0.0
            var[low] = exact
        np.maximum(var, 0.0, out=var)
        out[dst] = var
    return out


def _std_at(x: np.ndarray, w: int, index: np.ndarray) -> np.ndarray:
    """``rolling_std`` evaluated only at the (sorted) sample positions ``index``."""
    n = x.size
    if n < w:
        return np.full(index.size, float(np.std(x)) if n else 0.0)
    ends = np.maximum(index, w - 1)
    return np.sqrt(_trailing_var(x, w, ends))


def rolling_std(signal: UniformSignal, window_s: float, channel: int = 0) -> UniformSignal:
    """Trailing population standard deviation over ``floor(window_s * rate)`` samples.

    The first ``window - 1`` outputs repeat the first full-window value. A
    signal shorter than one window yields the SD of all its samples.
    """
    w = _window_samples(window_s, signal.rate_hz)
    if w < 2:
        raise InvalidParameterError(
            f"rolling_std window of {window_s}s at {signal.rate_hz} Hz is {w} sample(s); need >= 2"
        )
    x = np.ascontiguousarray(signal.channel(channel))
    n = x.size
    if n == 0:
        out = np.empty(0)
    elif n < w:
        out = np.full(n, float(np.std(x)))
    else:
        var = _trailing_var(x, w)
        out = np.empty(n)
        out[w - 1 :] = np.sqrt(var)
        out[: w - 1] = out[w - 1]
    return UniformSignal(signal.start, signal.rate_hz, out, signal.unit)


def rolling_mean(series, window_s: float, channel: int = 0) -> UniformSignal:
    """Trailing mean; booleans count as 0/1. Leading samples average what is available."""
    x = _values_1d(series, channel)
    rate = series.rate_hz
    w = _window_samples(window_s, rate)
    if w < 1:
        raise InvalidParameterError(f"rolling_mean window {window_s}s is shorter than one sample")
    n = x.size
    unit = getattr(series, "unit", "dimensionless")
    if n == 0:
        return UniformSignal(series.start, rate, np.empty(0), unit)
    c = np.concatenate([[0.0], np.cumsum(x)])
    i = np.arange(1, n + 1)
    lo = np.maximum(0, i - w)
    out = (c[i] - c[lo]) / (i - lo)
    return UniformSignal(series.start, rate, out, unit)


def threshold(signal: UniformSignal, predicate: str, value, channel: int = 0) -> BinarySeries:
    """Element-wise ``>=``, ``<=`` or ``within`` (inclusive ``[lo, hi]``) test."""
    x = signal.channel(channel)
    if predicate == ">=":
        out = x >= value
    elif predicate == "<=":
        out = x <= value
    elif predicate == "within":
        lo, hi = value
        if lo > hi:
            raise InvalidParameterError(f"within bounds reversed: lo={lo} > hi={hi}")
        out = (x >= lo) & (x <= hi)
    else:
        raise InvalidParameterError(f"unknown predicate {predicate!r}")
    return BinarySeries(signal.start, signal.rate_hz, out)


# --------------------------------------------------------------------------
# binary series algebra


def _hold_plan(src: Timebase, dst: Timebase, max_stale_periods: float = 2.0):
    """Source index held at each target sample, and whether it is fresh.

    A held value is stale when it lies more than ``max_stale_periods`` source
    periods away from the target timestamp, before or after.
    """
    offset = dst.start - src.start
    pos = (offset + np.arange(dst.n) / dst.rate_hz) * src.rate_hz
    idx = np.floor(pos + _INDEX_EPS).astype(np.int64)
    np.clip(idx, 0, src.n - 1, out=idx)
    fresh = np.abs(pos - idx) <= max_stale_periods + _INDEX_EPS
    return idx, fresh


def reindex_hold(series: BinarySeries, target, max_stale_periods: float = 2.0) -> BinarySeries:
    """Staircase-hold ``series`` onto the timebase of ``target``.

    Each target sample takes the most recent source value at or before its
    timestamp (the first source value before the source starts). Evidence
    older than ``max_stale_periods`` source periods becomes False.
    """
    dst = _as_timebase(target)
    src = series.timebase
    if src.n == 0:
        raise AlignmentError("cannot reindex an empty series")
    if dst.n and (dst.end <= src.start or src.end <= dst.start):
        raise AlignmentError(
            f"series [{src.start}, {src.end}) and target [{dst.start}, {dst.end}) do not overlap"
        )
    idx, fresh = _hold_plan(src, dst, max_stale_periods)
    return BinarySeries(dst.start, dst.rate_hz, series.values[idx] & fresh)


def combine(series_list: Sequence[BinarySeries], mode: str = "or") -> BinarySeries:
    if not series_list:
        raise InvalidParameterError("combine needs at least one series")
    first = series_list[0]
    for s in series_list[1:]:
        if not first.timebase.matches(s.timebase):
            raise AlignmentError(
                "combine requires a shared timebase; reindex the series first"
            )
    stack = np.vstack([s.values for s in series_list])
    mode = mode.lower()
    if mode == "or":
        out = stack.any(axis=0)
    elif mode == "and":
        out = stack.all(axis=0)
    else:
        raise InvalidParameterError(f"unknown combine mode {mode!r}")
    return BinarySeries(first.start, first.rate_hz, out)


def _majority_pass(v: np.ndarray, k: int) -> np.ndarray:
    padded = np.concatenate([np.repeat(v[:1], k), v, np.repeat(v[-1:], k)])
    c = np.concatenate([[0], np.cumsum(padded, dtype=np.int64)])
    count = c[2 * k + 1 :] - c[: -2 * k - 1]
    return count > k


def smooth_majority(series: BinarySeries, window_s: float, max_passes: int = 10_000) -> BinarySeries:
    """Centered majority filter, repeated until the series stops changing.

    The window holds every sample within ``window_s / 2`` of the centre
    (``2k + 1`` samples, so no ties). Ends are extended with the edge value.
    The fixed point has no interior run shorter than ``k + 1`` samples and
    smoothing it again is a no-op.
    """
    if window_s * series.rate_hz < 1:
        raise InvalidParameterError(f"smoothing window {window_s}s is shorter than one sample")
    k = int(round(window_s * series.rate_hz / 2))
    v = series.values
    if v.size == 0 or k == 0:
        return series
    for _ in range(max_passes):
        nxt = _majority_pass(v, k)
        if np.array_equal(nxt, v):
            break
        v = nxt
    else:  # pragma: no cover - end-point repetition guarantees convergence
        raise RuntimeError("majority smoothing did not converge")
    return BinarySeries(series.start, series.rate_hz, v)


def _runs(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index bounds ``[first, stop)`` of every True run."""
    padded = np.concatenate([[False], values, [False]]).astype(np.int8)
    d = np.diff(padded)
    return np.flatnonzero(d == 1), np.flatnonzero(d == -1)


def to_intervals(series: BinarySeries, min_duration_s: float = 0.0) -> IntervalSet:
    first, stop = _runs(series.values)
    keep = (stop - first) / series.rate_hz >= min_duration_s
    first, stop = first[keep], stop[keep]
    return IntervalSet._from_arrays(
        series.start + first / series.rate_hz, series.start + stop / series.rate_hz
    )


def from_intervals(intervals: IntervalSet, target) -> BinarySeries:
    """Rasterize: sample ``i`` is True iff its timestamp lies in the set."""
    tb = _as_timebase(target)
    mark = np.zeros(tb.n + 1, dtype=np.int64)
    if intervals and tb.n:
        a = np.ceil((intervals.starts - tb.start) * tb.rate_hz - _INDEX_EPS).astype(np.int64)
        b = np.ceil((intervals.ends - tb.start) * tb.rate_hz - _INDEX_EPS).astype(np.int64)
        np.clip(a, 0, tb.n, out=a)
        np.clip(b, 0, tb.n, out=b)
        np.add.at(mark, a, 1)
        np.add.at(mark, b, -1)
    return BinarySeries(tb.start, tb.rate_hz, np.cumsum(mark[:-1]) > 0)
