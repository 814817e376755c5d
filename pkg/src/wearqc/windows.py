"""Windows-of-interest, per-window data ratios and their CCDF."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, RecordingError
from .ingest import ParticipantRecording
from .intervals import IntervalSet
from .timeutil import calendar_days, get_tz, wall_clock

__all__ = [
    "WindowOfInterest",
    "WindowRule",
    "DataRatio",
    "parse_time_of_day",
    "extract_windows",
    "data_ratio",
    "window_ratios",
    "ccdf",
]


@dataclass(frozen=True)
class WindowOfInterest:
    participant_id: str
    start: float
    end: float
    label: str

    def __post_init__(self):
        if not self.start < self.end:
            raise InvalidParameterError(f"window start {self.start} must precede end {self.end}")

    @property
    def duration(self) -> float:
        return self.end - self.start


def parse_time_of_day(text: str) -> float:
    """``"HH:MM"`` or ``"HH:MM:SS"`` to seconds after midnight; ``"24:00"`` is allowed."""
    parts = str(text).strip().split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise InvalidParameterError(f"bad time of day {text!r}") from None
    if len(nums) not in (2, 3):
        raise InvalidParameterError(f"bad time of day {text!r}")
    h, m, s = (nums + [0])[:3]
    secs = h * 3600 + m * 60 + s
    if not (0 <= m < 60 and 0 <= s < 60 and 0 <= secs <= 86400):
        raise InvalidParameterError(f"time of day out of range: {text!r}")
    return float(secs)


@dataclass(frozen=True)
class WindowRule:
    """How windows are cut from a recording.

    ``fixed_daily_span`` takes a start and end time of day (an end before the
    start spans midnight). ``relative_to_event`` places a window of
    ``duration_s`` at ``offset_s`` from the start of every span labelled
    ``anchor``.
    """

    kind: str
    start_tod_s: float = 0.0
    end_tod_s: float = 86400.0
    offset_s: float = 0.0
    duration_s: float = 0.0
    anchor: str | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "fixed_daily_span":
            if not (0 <= self.start_tod_s <= 86400 and 0 <= self.end_tod_s <= 86400):
                raise InvalidParameterError("times of day must lie in [0, 86400]")
            if self.start_tod_s == self.end_tod_s:
                raise InvalidParameterError("daily span has zero duration")
        elif self.kind == "relative_to_event":
            if not self.duration_s > 0:
                raise InvalidParameterError("duration_s must be positive")
            if not self.anchor:
                raise InvalidParameterError("relative_to_event needs an anchor label")
        else:
            raise InvalidParameterError(f"unknown window rule kind {self.kind!r}")

    @classmethod
    def fixed_daily_span(cls, start: str | float, end: str | float, label: str = "daily") -> WindowRule:
        s = parse_time_of_day(start) if isinstance(start, str) else float(start)
        e = parse_time_of_day(end) if isinstance(end, str) else float(end)
        return cls("fixed_daily_span", start_tod_s=s, end_tod_s=e, label=label)

    @classmethod
    def relative_to_event(cls, anchor: str, offset_s: float, duration_s: float,
                          label: str | None = None) -> WindowRule:
        return cls("relative_to_event", offset_s=float(offset_s), duration_s=float(duration_s),
                   anchor=anchor, label=label or f"{anchor}{offset_s:+g}s")

    @classmethod
    def parse(cls, text: str) -> WindowRule:
        """Parse ``daily:10:00-20:00[@label]`` or ``event:<anchor>:<offset_s>:<duration_s>[:label]``."""
        kind, _, rest = text.partition(":")
        if kind == "daily":
            span, _, label = rest.partition("@")
            a, sep, b = span.partition("-")
            if not sep:
                raise InvalidParameterError(f"bad daily rule {text!r}; expected daily:HH:MM-HH:MM")
            return cls.fixed_daily_span(a, b, label or "daily")
        if kind == "event":
            parts = rest.split(":")
            if len(parts) not in (3, 4):
                raise InvalidParameterError(
                    f"bad event rule {text!r}; expected event:<anchor>:<offset_s>:<duration_s>")
            try:
                off, dur = float(parts[1]), float(parts[2])
            except ValueError:
                raise InvalidParameterError(f"non-numeric offset/duration in {text!r}") from None
            return cls.relative_to_event(parts[0], off, dur, parts[3] if len(parts) == 4 else None)
        raise InvalidParameterError(f"unknown window rule {text!r}")


@dataclass(frozen=True)
class DataRatio:
    window: WindowOfInterest
    ratio: float


def _clip_to(lo, hi, extent):
    a, b = max(lo, extent[0]), min(hi, extent[1])
    return (a, b) if b > a else None


def extract_windows(recording: ParticipantRecording, rule: WindowRule, tz="UTC",
                    extent: tuple[float, float] | None = None) -> list[WindowOfInterest]:
    """Windows for one participant, clipped to the recording extent.

    Windows that do not overlap the extent are dropped. ``extent`` defaults to
    the span of the recording's sessions; a recording without sessions yields
    no windows.
    """
    if rule.kind == "relative_to_event" and rule.anchor not in recording.label_spans:
        raise RecordingError(
            f"unknown anchor label {rule.anchor!r}; have {sorted(recording.label_spans)}")
    extent = extent or recording.extent
    if extent is None:
        return []
    pid = recording.participant_id
    out = []
    if rule.kind == "fixed_daily_span":
        tz = get_tz(tz)
        wraps = rule.end_tod_s < rule.start_tod_s
        days = calendar_days(extent[0], extent[1], tz)
        if wraps and days:
            first = days[0][0] - dt.timedelta(days=1)
            days = [(first, None, None)] + days
        for day, _, _ in days:
            lo = wall_clock(day, rule.start_tod_s, tz)
            end_day = day + dt.timedelta(days=1) if wraps else day
            hi = wall_clock(end_day, rule.end_tod_s, tz)
            span = _clip_to(lo, hi, extent)
            if span:
                out.append(WindowOfInterest(pid, span[0], span[1], rule.label))
    else:
        for ev_start, _ in recording.label_spans[rule.anchor]:
            lo = ev_start + rule.offset_s
            span = _clip_to(lo, lo + rule.duration_s, extent)
            if span:
                out.append(WindowOfInterest(pid, span[0], span[1], rule.label))
    return out


def data_ratio(window: WindowOfInterest, valid: IntervalSet) -> DataRatio:
    covered = valid.intersect(IntervalSet([(window.start, window.end)])).total_duration()
    return DataRatio(window, min(1.0, covered / window.duration))


def window_ratios(windows, valid: IntervalSet) -> list[DataRatio]:
    return [data_ratio(w, valid) for w in windows]


def ccdf(ratios, grid) -> dict[str, list[tuple[float, int]]]:
    """Per participant, the number of windows with ``ratio >= x`` for each ``x`` in ``grid``."""
    grid = [float(x) for x in grid]
    if any(not 0.0 <= x <= 1.0 for x in grid):
        raise InvalidParameterError("ccdf thresholds must lie in [0, 1]")
    by_pid: dict[str, list[float]] = {}
    for r in ratios:
        by_pid.setdefault(r.window.participant_id, []).append(r.ratio)
    out = {}
    for pid in sorted(by_pid):
        vals = np.sort(np.asarray(by_pid[pid], dtype=float))
        idx = np.searchsorted(vals, grid, side="left")
        out[pid] = [(x, int(vals.size - i)) for x, i in zip(grid, idx)]
    return out
