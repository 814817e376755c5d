"""Windows of interest and data-availability CCDFs for two participants."""

# %% Setup
from __future__ import annotations

from pathlib import Path

import numpy as np

from wearqc.ingest import E4Session, ParticipantRecording
from wearqc.intervals import IntervalSet
from wearqc.plotting import plot_ccdf, save_svg
from wearqc.signal import UniformSignal
from wearqc.windows import WindowRule, ccdf, extract_windows, window_ratios

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
MIDNIGHT = 1585699200.0
DAY = 86400.0


def stub(start):
    # one-minute placeholder session; only its extent matters here
    return E4Session(acc=UniformSignal(start, 32.0, np.zeros((1920, 3))),
                     eda=UniformSignal(start, 4.0, np.zeros(240)),
                     temp=UniformSignal(start, 4.0, np.zeros(240)))


# %% Two participants over 14 days with different wear habits
rng = np.random.default_rng(3)
curves_in = []
for pid, mean_h in (("diligent", 11.0), ("casual", 6.0)):
    rec = ParticipantRecording(pid, [stub(MIDNIGHT), stub(MIDNIGHT + 14 * DAY - 60)])
    wear = IntervalSet(
        (MIDNIGHT + k * DAY + 9 * 3600, MIDNIGHT + k * DAY + 9 * 3600 + rng.normal(mean_h, 2) * 3600)
        for k in range(14))
    windows = extract_windows(rec, WindowRule.fixed_daily_span("10:00", "20:00", "wake"))
    ratios = window_ratios(windows, wear)
    curves_in += ratios
    print(pid, "mean ratio", round(np.mean([r.ratio for r in ratios]), 3))

# %% How many windows survive a given retention threshold
grid = np.round(np.linspace(0, 1, 21), 2).tolist() + [0.85]
curves = ccdf(curves_in, sorted(set(grid)))
for pid, pts in curves.items():
    print(pid, "windows with ratio >= 0.85:", dict(pts)[0.85])
save_svg(plot_ccdf(curves), OUT / "ccdf.svg")
print("wrote", OUT / "ccdf.svg")
