from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearqc.activity import ActivityConfig, ai_abs
from wearqc.errors import InvalidParameterError
from wearqc.signal import UniformSignal

T0 = 1585440000.0


def acc(x, rate=32.0):
    return UniformSignal(T0, rate, np.asarray(x, float), "g")


def brute(x, w, noise=0.0):
    out = []
    for k in range(len(x) // w):
        b = x[k * w : (k + 1) * w]
        v = [np.var(b[:, m], ddof=1) for m in range(3)]
        out.append(np.sqrt(max(np.mean([vi - noise for vi in v]), 0.0)))
    return np.array(out)


def test_matches_brute_force(rng):
    x = rng.normal(0, 0.3, (32 * 50 + 7, 3))
    out = ai_abs(acc(x))
    assert len(out) == 50 and out.rate_hz == 1.0 and out.start == T0
    assert np.allclose(out.channel(), brute(x, 32), rtol=0, atol=1e-9)


def test_known_variances():
    # per-axis variances 0.04, 0.01, 0.01 -> mean 0.02
    base = np.array([1.0, -1.0] * 16)
    x = np.stack([0.2 * base, 0.1 * base, 0.1 * base], axis=1)
    s = np.sqrt(32 / 31)  # convert ddof=0 to ddof=1
    out = ai_abs(acc(x / s))
    assert out.channel()[0] == pytest.approx(np.sqrt(0.02), rel=1e-12)


def test_noise_clamped_at_zero(rng):
    x = rng.normal(0, 0.01, (320, 3))
    out = ai_abs(acc(x), ActivityConfig(systematic_noise_var_g2=1.0))
    assert np.all(out.channel() == 0.0)


def test_still_is_zero():
    assert np.all(ai_abs(acc(np.tile([0.0, 0.0, 1.0], (640, 1)))).channel() == 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0), st.integers(0, 1000))
def test_scale_homogeneous(c, seed):
    x = np.random.default_rng(seed).normal(0, 1, (96, 3))
    a = ai_abs(acc(x)).channel()
    b = ai_abs(acc(c * x)).channel()
    assert np.allclose(b, c * a, rtol=1e-9)


def test_window_length():
    out = ai_abs(acc(np.random.default_rng(0).normal(size=(320, 3))), ActivityConfig(window_s=2.0))
    assert len(out) == 5 and out.rate_hz == 0.5


def test_errors():
    with pytest.raises(InvalidParameterError):
        ai_abs(UniformSignal(T0, 32, np.zeros((64, 2)), "g"))
    with pytest.raises(InvalidParameterError):
        ai_abs(acc(np.zeros((10, 3))))
    with pytest.raises(InvalidParameterError):
        ai_abs(acc(np.zeros((10, 3)), rate=1.0))
    with pytest.raises(InvalidParameterError):
        ActivityConfig(window_s=0)
