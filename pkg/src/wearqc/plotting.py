"""Static SVG figures for EDA processing, CCDFs, bootstrap spreads and compliance.

All figures are rendered with the Agg backend and written without a
timestamp, so the same inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .timeutil import calendar_days  # noqa: E402

__all__ = ["save_svg", "plot_eda", "plot_ccdf", "plot_bootstrap", "plot_compliance"]

_RC = {"svg.hashsalt": "wearqc", "svg.fonttype": "none", "font.size": 8}

# boxplot orientation keyword changed in matplotlib 3.10
_HORIZONTAL = ({"orientation": "horizontal"}
               if tuple(int(p) for p in matplotlib.__version__.split(".")[:2]) >= (3, 10)
               else {"vert": False})

COMPLIANT = "#2ca02c"
NONCOMPLIANT = "#ff7f0e"


def save_svg(fig, path):
    with plt.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _shade(ax, t, mask, color, alpha=0.25):
    """Shade contiguous runs where ``mask`` is true."""
    m = np.concatenate([[False], np.asarray(mask, bool), [False]])
    d = np.diff(m.astype(np.int8))
    for a, b in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
        ax.axvspan(t[a], t[min(b, len(t) - 1)], color=color, alpha=alpha, lw=0)


def plot_eda(t, raw, processed, valid, noise_amp, noise_threshold, range_sqi, noise_sqi):
    """Two stacked panels: raw and processed EDA, then noise amplitude against its threshold."""
    with plt.rc_context(_RC):
        fig, (a1, a2) = plt.subplots(2, 1, figsize=(9, 4.5), sharex=True)
        rel = (np.asarray(t) - t[0]) / 60.0 if len(t) else np.asarray(t)
        a1.plot(rel, raw, lw=0.6, color="0.5", label="raw")
        a1.plot(rel, np.where(valid, processed, np.nan), lw=0.8, color="C0", label="processed")
        _shade(a1, rel, ~np.asarray(valid, bool), "C3")
        a1.set_ylabel("EDA (uS)")
        a1.legend(loc="upper right", frameon=False)
        a2.plot(rel, noise_amp, lw=0.6, color="C1", label="noise amplitude")
        a2.axhline(noise_threshold, ls="--", color="k", lw=0.8)
        _shade(a2, rel, ~(np.asarray(range_sqi, bool) & np.asarray(noise_sqi, bool)), "C3")
        a2.set_ylabel("noise (uS)")
        a2.set_xlabel("time (min)")
        fig.tight_layout()
    return fig


def plot_ccdf(curves: dict):
    """Step plot of window count against data-ratio threshold, one line per participant."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for pid, pts in sorted(curves.items()):
            x = [p[0] for p in pts]
            y = [p[1] for p in pts]
            ax.step(x, y, where="post", label=str(pid))
        ax.axvline(0.85, ls=":", color="0.4", lw=0.8)
        ax.set_xlabel("data ratio threshold")
        ax.set_ylabel("windows with ratio >= threshold")
        ax.set_xlim(0, 1)
        if len(curves) <= 10:
            ax.legend(frameon=False)
        fig.tight_layout()
    return fig


def plot_bootstrap(records):
    """Grid of metric distributions per retention ratio; rows are series, columns metrics.

    A dashed line marks the gap-free reference value.
    """
    series = sorted({r.series_id for r in records})
    metrics = sorted({r.metric for r in records})
    ratios = sorted({r.retention_ratio for r in records}, reverse=True)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(len(series), len(metrics), squeeze=False,
                                 figsize=(3 * len(metrics), 2.2 * len(series)))
        for i, s in enumerate(series):
            for j, m in enumerate(metrics):
                ax = axes[i][j]
                sel = [r for r in records if r.series_id == s and r.metric == m]
                data = [[r.value for r in sel if r.retention_ratio == q] for q in ratios]
                ax.boxplot(data, widths=0.6, showfliers=False, **_HORIZONTAL)
                ax.set_yticks(range(1, len(ratios) + 1), [f"{q:g}" for q in ratios])
                if sel:
                    ax.axvline(sel[0].reference_value, ls="--", color="k", lw=0.9)
                if i == 0:
                    ax.set_title(m)
                if j == 0:
                    ax.set_ylabel(f"{s}\nretention ratio")
        fig.tight_layout()
    return fig


def plot_compliance(doc: dict, stream: str = "wearable"):
    """Day-by-time-of-day layout: one bar per day, green when compliant, orange otherwise,
    weekends shaded gray."""
    days = doc.get("streams", {}).get(stream, [])
    span = doc.get("study_span")
    starts = [a for _, a, _ in calendar_days(span["start"], span["end"], doc["timezone"])] if span else []
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(9, max(2.5, 0.16 * len(days) + 1)))
        for k, d in enumerate(days):
            y = len(days) - 1 - k
            if d["weekend"]:
                ax.axhspan(y - 0.5, y + 0.5, color="0.9", lw=0)
            midnight = starts[k]
            color = COMPLIANT if d["compliant"] else NONCOMPLIANT
            spans = [((a - midnight) / 3600.0, (b - a) / 3600.0) for a, b in d["intervals"]]
            if spans:
                ax.broken_barh(spans, (y - 0.35, 0.7), color=color)
        ax.set_yticks(range(len(days)), [d["day"] for d in reversed(days)])
        ax.set_xlim(0, 24)
        ax.set_xticks(range(0, 25, 3))
        ax.set_xlabel("time of day (h)")
        ax.set_title(f"{doc.get('participant_id', '')} {stream}")
        fig.tight_layout()
    return fig

