"""Deterministic synthetic E4 recordings with known wear/non-wear ground truth.

Worn segments carry skin temperature around 33 degC, tonic EDA with
occasional responses and bursty wrist motion; off-body segments cool
towards room temperature, show near-zero conductance and a still
accelerometer with count-level sensor noise. ACC is quantized to whole
counts (1/64 g) like the device output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .ingest import ACC_COUNTS_PER_G, E4Session
from .intervals import IntervalSet
from .signal import UniformSignal

__all__ = ["SyntheticRecording", "synthetic_session", "constant_session", "piecewise_session"]

DEFAULT_START = 1585440000.0  # 2020-03-29 00:00:00 UTC


@dataclass(frozen=True, eq=False)
class SyntheticRecording:
    session: E4Session
    wear: IntervalSet


def _bouts(rng, duration_s, wear_range_s, off_range_s, start_worn=True):
    t, worn, bouts = 0.0, start_worn, []
    while t < duration_s:
        lo, hi = wear_range_s if worn else off_range_s
        length = float(rng.uniform(lo, hi))
        end = min(duration_s, t + length)
        if worn:
            bouts.append((t, end))
        t, worn = end, not worn
    return bouts


def _mask(bouts, n, rate):
    m = np.zeros(n, dtype=bool)
    for a, b in bouts:
        m[int(round(a * rate)) : int(round(b * rate))] = True
    return m


def _smooth_steps(target, rate, tau_s):
    """First-order lag towards a piecewise-constant target (thermal inertia)."""
    alpha = 1.0 - np.exp(-1.0 / (rate * tau_s))
    out, _ = lfilter([alpha], [1.0, alpha - 1.0], target, zi=[(1.0 - alpha) * target[0]])
    return out


def synthetic_session(hours: float = 1.0, seed: int = 0, start: float = DEFAULT_START,
                      wear_range_s=(1200.0, 5400.0), off_range_s=(300.0, 2400.0)) -> SyntheticRecording:
    """Generate an E4 session of ``hours`` with alternating wear bouts."""
    rng = np.random.default_rng(seed)
    duration = hours * 3600.0
    bouts = _bouts(rng, duration, wear_range_s, off_range_s)

    n4 = int(round(duration * 4))
    n32 = int(round(duration * 32))
    worn4 = _mask(bouts, n4, 4.0)
    worn32 = _mask(bouts, n32, 32.0)

    # skin temperature: 33 degC on body, 23 degC ambient, minutes-long lag
    temp_target = np.where(worn4, 33.0, 23.0) + rng.normal(0, 0.05, n4)
    temp = _smooth_steps(temp_target, 4.0, tau_s=120.0)
    temp = np.round(temp, 2)

    # EDA: slowly wandering tonic level plus sparse responses when worn
    tonic = 1.0 + 0.5 * np.sin(np.arange(n4) / (4.0 * 1800.0) * 2 * np.pi + rng.uniform(0, 6.3))
    scr = np.zeros(n4)
    onsets = np.flatnonzero(rng.random(n4) < 1.0 / (4 * 120))
    kernel = np.exp(-np.arange(40) / 12.0) * (1 - np.exp(-np.arange(40) / 2.0))
    for o in onsets:
        seg = scr[o : o + kernel.size]
        seg += 0.3 * kernel[: seg.size]
    eda = np.where(worn4, tonic + scr, 0.0) + rng.normal(0, 0.002, n4)
    eda = np.round(np.clip(eda, 0.0, None), 6)

    # ACC: wrist orientation drifts smoothly between per-minute anchors,
    # motion intensity changes per minute
    minutes = int(np.ceil(duration / 60.0)) + 1
    g_dir = rng.normal(0, 1, (minutes, 3))
    g_dir /= np.linalg.norm(g_dir, axis=1, keepdims=True)
    tm = np.arange(n32) / (60.0 * 32.0)
    grav = np.column_stack([np.interp(tm, np.arange(minutes), g_dir[:, a]) for a in range(3)])
    grav /= np.linalg.norm(grav, axis=1, keepdims=True)
    intensity = np.repeat(rng.choice([0.06, 0.15, 0.3, 0.6], size=minutes, p=[0.3, 0.35, 0.25, 0.1]),
                          60 * 32)[:n32]
    motion = rng.normal(0, 1, (n32, 3)) * intensity[:, None]
    # a device lying on the desk keeps one resting orientation
    desk = np.array([0.05, -0.03, 1.0]) / np.linalg.norm([0.05, -0.03, 1.0])
    acc_g = np.where(worn32[:, None], grav + motion, desk)
    counts = np.round(acc_g * ACC_COUNTS_PER_G)
    # off-body: a still device flickers by one count now and then
    flicker = (rng.random((n32, 3)) < 0.05) * rng.choice([-1.0, 1.0], size=(n32, 3))
    counts = np.where(worn32[:, None], counts, counts + flicker)

    session = E4Session(
        acc=UniformSignal(start, 32.0, counts / ACC_COUNTS_PER_G, "g"),
        eda=UniformSignal(start, 4.0, eda, "uS"),
        temp=UniformSignal(start, 4.0, temp, "degC"),
        source=f"synthetic(hours={hours}, seed={seed})",
    )
    wear = IntervalSet((start + a, start + b) for a, b in bouts)
    return SyntheticRecording(session, wear)


def constant_session(duration_s: float, temp_c: float, eda_us: float, acc_sd_g: float = 0.0,
                     seed: int = 0, start: float = DEFAULT_START) -> E4Session:
    """Stationary fixture: fixed temperature and conductance, Gaussian motion on each axis."""
    rng = np.random.default_rng(seed)
    n4 = int(round(duration_s * 4))
    n32 = int(round(duration_s * 32))
    acc = np.tile([0.0, 0.0, 1.0], (n32, 1))
    if acc_sd_g > 0:
        acc = acc + rng.normal(0, acc_sd_g, (n32, 3))
    return E4Session(
        acc=UniformSignal(start, 32.0, acc, "g"),
        eda=UniformSignal(start, 4.0, np.full(n4, eda_us), "uS"),
        temp=UniformSignal(start, 4.0, np.full(n4, temp_c), "degC"),
        source="constant",
    )


def piecewise_session(segments, seed: int = 0, start: float = DEFAULT_START) -> SyntheticRecording:
    """Concatenate stationary segments with step changes between them.

    Parameters
    ----------
    segments : sequence of (duration_s, temp_c, eda_us, acc_sd_g)
        ``acc_sd_g`` is the SD of Gaussian motion on every axis; 0 gives a
        perfectly still device.

    Returns
    -------
    SyntheticRecording
        ``wear`` marks the segments where any default refined threshold is met.
    """
    rng = np.random.default_rng(seed)
    temps, edas, accs, wear, t = [], [], [], [], 0.0
    for duration, temp_c, eda_us, acc_sd in segments:
        n4, n32 = int(round(duration * 4)), int(round(duration * 32))
        temps.append(np.full(n4, float(temp_c)))
        edas.append(np.full(n4, float(eda_us)))
        acc = np.tile([0.0, 0.0, 1.0], (n32, 1))
        if acc_sd > 0:
            acc = acc + rng.normal(0, acc_sd, (n32, 3))
        accs.append(acc)
        if temp_c >= 32.0 or eda_us >= 0.03 or acc_sd >= 0.1:
            wear.append((start + t, start + t + duration))
        t += duration
    session = E4Session(
        acc=UniformSignal(start, 32.0, np.vstack(accs), "g"),
        eda=UniformSignal(start, 4.0, np.concatenate(edas), "uS"),
        temp=UniformSignal(start, 4.0, np.concatenate(temps), "degC"),
        source="piecewise",
    )
    return SyntheticRecording(session, IntervalSet(wear))
