"""Study-timezone helpers: calendar days, wall-clock instants, time of day."""

from __future__ import annotations

import datetime as dt
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

import numpy as np

from .errors import ConfigError

__all__ = ["get_tz", "calendar_days", "wall_clock", "seconds_of_day", "weekday_of"]


def get_tz(tz) -> dt.tzinfo:
    if isinstance(tz, dt.tzinfo):
        return tz
    try:
        return ZoneInfo(str(tz))
    except (ZoneInfoNotFoundError, ValueError):
        raise ConfigError(f"unknown timezone {tz!r}") from None


def wall_clock(day: dt.date, seconds: float, tz) -> float:
    """Unix time of ``seconds`` after local midnight of ``day``, counted on the wall clock.

    ``seconds`` may reach 86400 (next midnight). Nonexistent local times
    inside a DST gap resolve with ``fold=0``.
    """
    base = dt.datetime(day.year, day.month, day.day, tzinfo=get_tz(tz))
    return (base + dt.timedelta(seconds=seconds)).timestamp()


def local_date(t: float, tz) -> dt.date:
    return dt.datetime.fromtimestamp(t, get_tz(tz)).date()


def calendar_days(lo: float, hi: float, tz) -> list[tuple[dt.date, float, float]]:
    """Local calendar days touched by ``[lo, hi)`` as ``(date, midnight, next midnight)``."""
    if not hi > lo:
        return []
    tz = get_tz(tz)
    day = local_date(lo, tz)
    last = local_date(hi, tz)
    if wall_clock(last, 0, tz) >= hi:
        last -= dt.timedelta(days=1)
    out = []
    while day <= last:
        nxt = day + dt.timedelta(days=1)
        out.append((day, wall_clock(day, 0, tz), wall_clock(nxt, 0, tz)))
        day = nxt
    return out


def seconds_of_day(t: np.ndarray, tz) -> np.ndarray:
    """Local seconds since midnight for Unix times ``t``.

    UTC offsets are looked up once per distinct quarter hour, which is exact
    for every zone whose transitions fall on quarter-hour boundaries.
    """
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return t.copy()
    tz = get_tz(tz)
    q = np.floor(t / 900.0)
    uq, inv = np.unique(q, return_inverse=True)
    offs = np.array([
        dt.datetime.fromtimestamp(v * 900.0, tz).utcoffset().total_seconds() for v in uq
    ])
    return np.mod(t + offs[inv], 86400.0)


def weekday_of(day: dt.date) -> int:
    """Monday = 0 ... Sunday = 6."""
    return day.weekday()
