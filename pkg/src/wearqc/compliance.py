"""Participant compliance: daily wear summaries, wear profiles, data ratios and alerts."""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .ingest import ParticipantRecording, session_intervals
from .intervals import IntervalSet
from .timeutil import calendar_days, get_tz, wall_clock

__all__ = [
    "DailySummary",
    "WearProfile",
    "AlertRule",
    "Alert",
    "ComplianceConfig",
    "daily_summaries",
    "wear_profile",
    "ratio_within",
    "evaluate_alerts",
    "compliance_report",
    "report_to_json",
]


@dataclass(frozen=True, eq=False)
class DailySummary:
    day: dt.date
    intervals: IntervalSet
    total_hours: float
    compliant: bool


@dataclass(frozen=True, eq=False)
class WearProfile:
    bin_width_s: float
    tod_ratio: np.ndarray
    # rows Monday..Sunday; NaN where the span holds no such weekday
    weekday_heatmap: np.ndarray
    n_days: int


@dataclass(frozen=True)
class AlertRule:
    min_hours: float = 8.0
    lookback_h: float = 24.0

    def __post_init__(self):
        if not self.min_hours >= 0 or not self.lookback_h > 0:
            raise InvalidParameterError("alert rule needs min_hours >= 0 and lookback_h > 0")


@dataclass(frozen=True)
class Alert:
    participant_id: str
    evaluated_at: float
    hours_in_lookback: float
    rule: AlertRule
    message: str


@dataclass(frozen=True)
class ComplianceConfig:
    tz: str = "UTC"
    threshold_h: float = 8.0
    bin_width_s: float = 1800.0
    phone_label: str = "phone"
    alert_rule: AlertRule = field(default_factory=AlertRule)

    def __post_init__(self):
        get_tz(self.tz)
        if not 0 <= self.threshold_h <= 24:
            raise InvalidParameterError("threshold_h must lie in [0, 24]")
        _check_bin_width(self.bin_width_s)


def _check_bin_width(bin_width_s):
    if not 0 < bin_width_s <= 86400 or (86400 / bin_width_s) % 1:
        raise InvalidParameterError("bin_width_s must divide a day evenly")


def daily_summaries(intervals: IntervalSet, tz="UTC", threshold_h: float = 8.0,
                    span: tuple[float, float] | None = None) -> list[DailySummary]:
    """One summary per local calendar day of ``span`` (default: the intervals' own span).

    A day is compliant when it holds at least ``threshold_h`` hours. Days
    containing a DST change are 23 or 25 hours long.
    """
    span = span or intervals.span
    if span is None:
        return []
    out = []
    for day, lo, hi in calendar_days(span[0], span[1], tz):
        clipped = intervals.clip(lo, hi)
        hours = clipped.total_duration() / 3600.0
        out.append(DailySummary(day, clipped, hours, hours >= threshold_h))
    return out


def _cumulative_coverage(intervals: IntervalSet, t: np.ndarray) -> np.ndarray:
    """Covered duration of ``(-inf, t)`` for each ``t``."""
    s, e = intervals.starts, intervals.ends
    if s.size == 0:
        return np.zeros_like(t)
    prefix = np.concatenate([[0.0], np.cumsum(e - s)])
    i = np.searchsorted(e, t, side="left")
    partial = np.zeros_like(t)
    inside = i < s.size
    partial[inside] = np.clip(t[inside] - s[i[inside]], 0.0, None)
    return prefix[i] + partial


def wear_profile(intervals: IntervalSet, study_span: tuple[float, float], bin_width_s: float = 1800.0,
                 tz="UTC") -> WearProfile:
    """Mean coverage per time-of-day bin over the calendar days of ``study_span``.

    Bin edges follow the local wall clock; each bin's coverage is normalized by
    its true length, so the skipped hour of a DST change does not count.
    """
    _check_bin_width(bin_width_s)
    lo, hi = study_span
    if not hi > lo:
        raise InvalidParameterError("study_span must be non-empty")
    tz = get_tz(tz)
    n_bins = int(round(86400 / bin_width_s))
    days = calendar_days(lo, hi, tz)
    edges = np.array([[wall_clock(d, k * bin_width_s, tz) for k in range(n_bins + 1)] for d, _, _ in days])
    cov = _cumulative_coverage(intervals, edges.ravel()).reshape(edges.shape)
    covered = np.diff(cov, axis=1)
    length = np.diff(edges, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        tod = np.clip(covered.sum(0) / length.sum(0), 0.0, 1.0)
        heat = np.full((7, n_bins), np.nan)
        wd = np.array([d.weekday() for d, _, _ in days])
        for w in range(7):
            sel = wd == w
            if sel.any():
                heat[w] = np.clip(covered[sel].sum(0) / length[sel].sum(0), 0.0, 1.0)
    return WearProfile(float(bin_width_s), tod, heat, len(days))


def ratio_within(intervals: IntervalSet, label_spans: IntervalSet) -> float:
    """Fraction of the labelled time that ``intervals`` cover."""
    total = label_spans.total_duration()
    if not label_spans or total <= 0:
        raise InvalidParameterError("label spans are empty")
    return intervals.intersect(label_spans).total_duration() / total


def evaluate_alerts(intervals: IntervalSet, now: float, rule: AlertRule | None = None,
                    participant_id: str = "") -> list[Alert]:
    """One alert when fewer than ``min_hours`` are covered in ``[now - lookback, now)``."""
    rule = rule or AlertRule()
    hours = intervals.covered(now - rule.lookback_h * 3600.0, now) / 3600.0
    if not hours < rule.min_hours:
        return []
    msg = (f"participant {participant_id or '?'} streamed {hours:.2f} h of wearable data "
           f"in the last {rule.lookback_h:g} h (minimum {rule.min_hours:g} h)")
    return [Alert(participant_id, float(now), hours, rule, msg)]


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _days_doc(summaries):
    return [
        {"day": s.day.isoformat(), "weekday": s.day.strftime("%a"),
         "weekend": s.day.weekday() >= 5, "total_hours": s.total_hours,
         "compliant": s.compliant, "intervals": s.intervals.to_list()}
        for s in summaries
    ]


def compliance_report(recording: ParticipantRecording, config: ComplianceConfig | None = None,
                      now: float | None = None) -> dict:
    """JSON-ready compliance document for one participant.

    Streams are ``wearable`` (session extents), ``phone`` (label spans named
    ``config.phone_label``) and ``labels`` (all other label spans united).
    The study span runs from local midnight of the first day touched by any
    stream to local midnight after the last one.
    """
    cfg = config or ComplianceConfig()
    wearable = session_intervals(recording, "session")
    labels = {k: v for k, v in recording.label_spans.items() if k != cfg.phone_label}
    streams = {
        "wearable": wearable,
        "phone": recording.label_spans.get(cfg.phone_label, IntervalSet()),
        "labels": IntervalSet().union(*labels.values()) if labels else IntervalSet(),
    }
    spans = [s.span for s in streams.values() if s]
    doc = {
        "participant_id": recording.participant_id,
        "timezone": str(cfg.tz),
        "threshold_h": cfg.threshold_h,
        "study_span": None,
        "streams": {},
        "events": {k: v.to_list() for k, v in sorted(recording.label_spans.items())},
        "wear_profile": None,
        "ratios": {"overall": None, "by_label": {}},
        "alerts": [],
    }
    if not spans:
        return doc
    days = calendar_days(min(a for a, _ in spans), max(b for _, b in spans), cfg.tz)
    lo, hi = days[0][1], days[-1][2]
    doc["study_span"] = {"start": lo, "end": hi, "first_day": days[0][0].isoformat(),
                         "last_day": days[-1][0].isoformat(), "n_days": len(days)}
    for name, ivs in streams.items():
        if ivs or name == "wearable":
            doc["streams"][name] = _days_doc(daily_summaries(ivs, cfg.tz, cfg.threshold_h, (lo, hi)))
    prof = wear_profile(wearable, (lo, hi), cfg.bin_width_s, cfg.tz)
    doc["wear_profile"] = {
        "bin_width_s": prof.bin_width_s,
        "tod_ratio": [_num(v) for v in prof.tod_ratio],
        "weekday_heatmap": [[_num(v) for v in row] for row in prof.weekday_heatmap],
    }
    doc["ratios"]["overall"] = wearable.covered(lo, hi) / (hi - lo)
    doc["ratios"]["by_label"] = {k: ratio_within(wearable, v) for k, v in sorted(labels.items()) if v}
    if now is not None:
        doc["alerts"] = [
            {"participant_id": a.participant_id, "evaluated_at": a.evaluated_at,
             "hours_in_lookback": a.hours_in_lookback,
             "rule": {"min_hours": a.rule.min_hours, "lookback_h": a.rule.lookback_h},
             "message": a.message}
            for a in evaluate_alerts(wearable, now, cfg.alert_rule, recording.participant_id)
        ]
    return doc


def report_to_json(doc: dict) -> str:
    """Byte-stable serialization: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
