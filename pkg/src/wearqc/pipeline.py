"""Per-session processing chains: non-wear first, then EDA artifact handling."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eda import EdaQualityConfig, eda_sub_sqis, process_eda
from .errors import InvalidParameterError
from .ingest import E4Session, ParticipantRecording, session_intervals
from .intervals import IntervalSet
from .nonwear import RefinedConfig, refined_nonwear
from .signal import BinarySeries, MaskedSignal, UniformSignal, reindex_hold, to_intervals

__all__ = ["EdaResult", "eda_pipeline", "VALID_SOURCES", "valid_intervals"]


@dataclass(frozen=True, eq=False)
class EdaResult:
    raw: UniformSignal
    processed: MaskedSignal
    range_sqi: BinarySeries
    noise_sqi: BinarySeries
    noise_amp: np.ndarray
    wear_sqi: BinarySeries | None


def eda_pipeline(session: E4Session, eda_cfg: EdaQualityConfig | None = None,
                 refined_cfg: RefinedConfig | None = None, apply_nonwear: bool = True) -> EdaResult:
    """Refined wrist SQI AND EDA SQI, then interpolation and short-segment exclusion."""
    eda_cfg = eda_cfg or EdaQualityConfig()
    eda = session.eda
    range_sqi, noise_sqi, amp = eda_sub_sqis(eda, eda_cfg)
    valid = range_sqi.values & noise_sqi.values
    wear = None
    if apply_nonwear:
        wear = refined_nonwear(session, refined_cfg).wrist_sqi
        if not wear.timebase.matches(eda.timebase):
            wear = reindex_hold(wear, eda.timebase)
        valid = valid & wear.values
    processed = process_eda(eda, BinarySeries(eda.start, eda.rate_hz, valid), eda_cfg)
    noise = amp.channel(0) if len(amp) == len(eda) else np.full(len(eda), np.nan)
    return EdaResult(eda, processed, range_sqi, noise_sqi, noise, wear)


VALID_SOURCES = ("session", "wear", "wear+eda")


def _session_valid(session: E4Session, source: str, eda_cfg, refined_cfg) -> IntervalSet:
    if source == "wear":
        return refined_nonwear(session, refined_cfg).wear_intervals
    res = eda_pipeline(session, eda_cfg, refined_cfg, apply_nonwear=True)
    return to_intervals(res.processed.valid)


def valid_intervals(recording: ParticipantRecording, source: str = "wear+eda",
                    eda_cfg: EdaQualityConfig | None = None, refined_cfg: RefinedConfig | None = None,
                    jobs: int = 1) -> IntervalSet:
    """Valid-data intervals of a recording.

    ``session`` is the recorded extent, ``wear`` the refined wear bouts and
    ``wear+eda`` the worn time that also survives EDA processing.
    """
    if source not in VALID_SOURCES:
        raise InvalidParameterError(f"unknown valid-data source {source!r}; use one of {VALID_SOURCES}")
    if source == "session":
        return session_intervals(recording, "session")

    def one(s):
        return _session_valid(s, source, eda_cfg, refined_cfg)

    if jobs > 1 and len(recording.sessions) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(one, recording.sessions))
    else:
        parts = [one(s) for s in recording.sessions]
    return IntervalSet().union(*parts)
