"""Data-quality toolkit for wrist-worn Empatica E4 recordings."""

from .activity import ActivityConfig, ai_abs
from .bootstrap import (
    BootstrapConfig,
    BootstrapRecord,
    GapMethod,
    bootstrap_spread,
    compute_metrics,
    induce_gaps,
    median_tod_impute,
    parse_method,
)
from .compliance import (
    Alert,
    AlertRule,
    ComplianceConfig,
    DailySummary,
    WearProfile,
    compliance_report,
    daily_summaries,
    evaluate_alerts,
    ratio_within,
    wear_profile,
)
from .eda import EdaQualityConfig, eda_sqi, noise_amplitude, process_eda
from .errors import WearQCError
from .ingest import (
    E4Session,
    ParticipantRecording,
    assemble_recording,
    load_manifest,
    read_e4_archive,
    read_labels,
    session_intervals,
    write_e4_archive,
    write_manifest,
)
from .intervals import IntervalSet
from .nonwear import (
    BottcherConfig,
    RefinedConfig,
    WristSqiResult,
    benchmark_nonwear,
    bottcher_nonwear,
    refined_nonwear,
)
from .signal import (
    BinarySeries,
    MaskedSignal,
    Timebase,
    UniformSignal,
    combine,
    from_intervals,
    reindex_hold,
    rolling_mean,
    rolling_std,
    smooth_majority,
    threshold,
    to_intervals,
)
from .webhook import DeliveryResult, post_webhook
from .windows import DataRatio, WindowOfInterest, WindowRule, ccdf, data_ratio, extract_windows

__version__ = "0.1.0"
