"""Refined vs reference non-wear detection on a synthetic day."""

# %% Setup
from __future__ import annotations

from pathlib import Path

import numpy as np

from wearqc.nonwear import benchmark_nonwear, bottcher_nonwear, refined_nonwear
from wearqc.synthetic import constant_session, synthetic_session

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# %% A synthetic session with known wear bouts
rec = synthetic_session(6.0, seed=42)
refined = refined_nonwear(rec.session)
bottcher = bottcher_nonwear(rec.session)

t = refined.wrist_sqi.times()
truth = np.zeros(t.size, bool)
for a, b in rec.wear:
    truth |= (t >= a) & (t < b)
print(f"ground-truth wear     {truth.mean():.3f}")
print(f"refined agreement     {np.mean(refined.wrist_sqi.values == truth):.4f} (4 Hz)")
tb = bottcher.wrist_sqi.times()
truth_b = np.array([rec.wear.covered(x, x + 60) >= 30 for x in tb])
print(f"Bottcher agreement    {np.mean(bottcher.wrist_sqi.values == truth_b):.4f} (per minute)")

# %% Where the two disagree: a warm desk below the skin-temperature bound
desk = constant_session(1800, 28.0, 0.01)
print("warm desk, refined wear fraction ", refined_nonwear(desk).wear_fraction)
print("warm desk, Bottcher wear fraction", bottcher_nonwear(desk).wear_fraction)

# %% Timing on 24 h of data
for algo in ("refined", "bottcher"):
    r = benchmark_nonwear(24.0, algo, seed=1, repetitions=3)
    print(f"{algo:<9} {r.median_ms_per_hour:7.2f} ms per hour of data")
