"""Second-per-second activity intensity (AI^ABS) from 3-axis acceleration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .signal import UniformSignal

__all__ = ["ActivityConfig", "ai_abs"]


@dataclass(frozen=True)
class ActivityConfig:
    window_s: float = 1.0
    systematic_noise_var_g2: float = 0.0

    def __post_init__(self):
        if not self.window_s > 0:
            raise InvalidParameterError("window_s must be positive")
        if not self.systematic_noise_var_g2 >= 0:
            raise InvalidParameterError("systematic_noise_var_g2 must be >= 0")


def ai_abs(acc: UniformSignal, cfg: ActivityConfig | None = None) -> UniformSignal:
    """Activity index per non-overlapping window, aligned to the ACC start.

    ``sqrt(max(mean_m(var_m - noise_var), 0))`` with ``var_m`` the per-axis
    sample variance (ddof=1). An incomplete trailing window is dropped.

    Returns
    -------
    UniformSignal
        One value per window at rate ``1 / window_s``, stamped at window start.
    """
    cfg = cfg or ActivityConfig()
    if acc.channels != 3:
        raise InvalidParameterError("ai_abs needs 3-axis acceleration")
    w = int(np.floor(cfg.window_s * acc.rate_hz + 1e-9))
    if w < 2:
        raise InvalidParameterError("activity window must hold at least 2 samples")
    n_win = len(acc) // w
    if n_win == 0:
        raise InvalidParameterError("signal shorter than one activity window")
    blocks = acc.samples[: n_win * w].reshape(n_win, w, 3)
    var = blocks.var(axis=1, ddof=1)
    ai = np.sqrt(np.maximum((var - cfg.systematic_noise_var_g2).mean(axis=1), 0.0))
    return UniformSignal(acc.start, 1.0 / cfg.window_s, ai, "")
