"""EDA quality: range and noise checks, short-gap interpolation, short-segment removal."""

# %% Setup
from __future__ import annotations

from pathlib import Path

import numpy as np

from wearqc.pipeline import eda_pipeline
from wearqc.plotting import plot_eda, save_svg
from wearqc.synthetic import synthetic_session

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# %% Run the chain: wrist SQI, EDA SQI, then artifact processing
session = synthetic_session(2.0, seed=7).session
res = eda_pipeline(session)
print(f"range SQI valid   {res.range_sqi.values.mean():.3f}")
print(f"noise SQI valid   {res.noise_sqi.values.mean():.3f}")
print(f"wear SQI valid    {res.wear_sqi.values.mean():.3f}")
print(f"retained after processing {res.processed.valid_fraction:.3f}")

# %% Every retained segment lasts at least a minute
v = np.concatenate([[0], res.processed.valid.values.astype(np.int8), [0]])
d = np.diff(v)
lengths = (np.flatnonzero(d == -1) - np.flatnonzero(d == 1)) / 4.0
print("retained segments (s):", np.round(lengths, 1).tolist()[:10])

# %% Figure
fig = plot_eda(res.raw.times(), res.raw.channel(), res.processed.signal.channel(),
               res.processed.valid.values, res.noise_amp, 0.1,
               res.range_sqi.values, res.noise_sqi.values)
save_svg(fig, OUT / "eda.svg")
print("wrote", OUT / "eda.svg")
