"""Gap-induction bootstrapping of summary metrics on complete reference windows.

Each iteration masks a random part of a gap-free series so that a target
fraction of samples is retained, then recomputes the metrics on what is
left. Repeating this per retention ratio gives the metric spread that a
given amount of missing data induces.
"""

from __future__ import annotations

import hashlib
import io
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindowError, GapPlacementError, ImputationError, InvalidParameterError
from .signal import BinarySeries, MaskedSignal, UniformSignal
from .timeutil import get_tz, seconds_of_day

__all__ = [
    "GapMethod",
    "BootstrapConfig",
    "BootstrapRecord",
    "parse_method",
    "gap_budget",
    "induce_gaps",
    "substream",
    "compute_metrics",
    "bootstrap_spread",
    "records_to_csv",
    "median_tod_impute",
    "tod_imputer",
]


@dataclass(frozen=True)
class GapMethod:
    """``single_block``, ``multi_block`` with ``n_blocks`` or a ``(lo, hi)`` block-count
    range, or ``random_points``."""

    kind: str = "single_block"
    n_blocks: int | None = None
    block_range: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in ("single_block", "multi_block", "random_points"):
            raise InvalidParameterError(f"unknown gap method {self.kind!r}")
        if self.kind == "multi_block":
            if (self.n_blocks is None) == (self.block_range is None):
                raise InvalidParameterError("multi_block needs exactly one of n_blocks, block_range")
            if self.n_blocks is not None and self.n_blocks < 1:
                raise InvalidParameterError("n_blocks must be >= 1")
            if self.block_range is not None:
                lo, hi = self.block_range
                if not 1 <= lo <= hi:
                    raise InvalidParameterError("block range must satisfy 1 <= lo <= hi")

    def __str__(self) -> str:
        if self.kind != "multi_block":
            return self.kind
        if self.n_blocks is not None:
            return f"multi_block:{self.n_blocks}"
        return f"multi_block:{self.block_range[0]}..{self.block_range[1]}"


def parse_method(text: str) -> GapMethod:
    """``single_block``, ``random_points``, ``multi_block:3`` or ``multi_block:1..5``."""
    text = text.strip()
    if text in ("single_block", "random_points"):
        return GapMethod(text)
    m = re.fullmatch(r"multi_block:(\d+)(?:\.\.(\d+))?", text)
    if not m:
        raise InvalidParameterError(
            f"bad gap method {text!r}; use single_block, random_points, multi_block:N or multi_block:LO..HI")
    if m.group(2) is None:
        return GapMethod("multi_block", n_blocks=int(m.group(1)))
    return GapMethod("multi_block", block_range=(int(m.group(1)), int(m.group(2))))


_METRIC_RE = re.compile(r"p(\d{1,3}(?:\.\d+)?)")


def _check_metric(name: str):
    if name == "mean":
        return
    m = _METRIC_RE.fullmatch(name)
    if not m or not 0 <= float(m.group(1)) <= 100:
        raise InvalidParameterError(f"unknown metric {name!r}; use mean or pNN with 0 <= NN <= 100")


@dataclass(frozen=True)
class BootstrapConfig:
    retention_ratios: tuple[float, ...] = (0.9, 0.75, 0.6)
    iterations: int = 100
    seed: int = 0
    metrics: tuple[str, ...] = ("p50", "p75", "mean")
    method: GapMethod = field(default_factory=GapMethod)

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.retention_ratios)
        if not ratios:
            raise InvalidParameterError("retention_ratios must not be empty")
        if any(not 0.0 < r <= 1.0 for r in ratios):
            raise InvalidParameterError("retention ratios must lie in (0, 1]")
        # canonical order: descending, duplicates removed
        object.__setattr__(self, "retention_ratios", tuple(sorted(set(ratios), reverse=True)))
        if self.iterations < 1:
            raise InvalidParameterError("iterations must be >= 1")
        if not self.metrics:
            raise InvalidParameterError("at least one metric is required")
        for m in self.metrics:
            _check_metric(m)
        if isinstance(self.method, str):
            object.__setattr__(self, "method", parse_method(self.method))


@dataclass(frozen=True)
class BootstrapRecord:
    series_id: str
    metric: str
    retention_ratio: float
    iteration: int
    value: float
    reference_value: float


def gap_budget(n: int, ratio: float) -> int:
    """Samples to mask so that ``round(ratio * n)`` remain (halves round up)."""
    if not 0.0 < ratio <= 1.0:
        raise InvalidParameterError(f"retention ratio must lie in (0, 1], got {ratio}")
    keep = min(n, int(math.floor(ratio * n + 0.5)))
    return n - keep


def _composition(rng, total: int, parts: int, min_part: int) -> np.ndarray:
    """Uniformly random ``parts`` integers, each >= ``min_part``, summing to ``total``."""
    free = total - parts * min_part
    if parts == 1:
        return np.array([total])
    bars = np.sort(rng.choice(free + parts - 1, size=parts - 1, replace=False))
    edges = np.concatenate([[-1], bars, [free + parts - 1]])
    return np.diff(edges) - 1 + min_part


def _block_mask(rng, n: int, gap: int, k: int) -> np.ndarray:
    """``k`` gap blocks of total length ``gap``, separated by at least one kept sample,
    uniformly placed without wrapping."""
    lengths = _composition(rng, gap, k, 1)
    # kept samples fill k+1 slots with the k-1 inner ones non-empty: draw all
    # slots >= 1 from a total padded by 2, then release the pad on the outer two
    spaces = _composition(rng, n - gap + 2, k + 1, 1)
    spaces[0] -= 1
    spaces[-1] -= 1
    valid = np.ones(n, dtype=bool)
    pos = 0
    for space, length in zip(spaces[:-1], lengths):
        pos += int(space)
        valid[pos : pos + int(length)] = False
        pos += int(length)
    return valid


def _max_blocks(n: int, gap: int) -> int:
    return min(gap, n - gap + 1)


def induce_gaps(signal: UniformSignal, ratio: float, method: GapMethod, rng) -> MaskedSignal:
    """Mask ``n - round(ratio * n)`` samples; values are never touched.

    Block placement is drawn exactly from the uniform distribution over all
    feasible arrangements (no rejection loop). Blocks of ``multi_block`` are
    kept apart by at least one retained sample so the block count is exact.
    A block-count range is truncated to the largest feasible count.
    """
    n = len(signal)
    if n == 0:
        raise InvalidParameterError("cannot induce gaps in an empty signal")
    gap = gap_budget(n, ratio)
    if isinstance(method, str):
        method = parse_method(method)
    if gap == 0:
        valid = np.ones(n, dtype=bool)
    elif method.kind == "random_points":
        valid = np.ones(n, dtype=bool)
        valid[rng.choice(n, size=gap, replace=False)] = False
    else:
        if method.kind == "single_block":
            k = 1
        elif method.n_blocks is not None:
            k = method.n_blocks
        else:
            lo, hi = method.block_range
            hi = min(hi, _max_blocks(n, gap))
            if hi < lo:
                raise GapPlacementError(
                    f"cannot place {lo} separated blocks totalling {gap} of {n} samples")
            k = int(rng.integers(lo, hi + 1))
        if k > _max_blocks(n, gap):
            raise GapPlacementError(
                f"cannot place {k} separated blocks totalling {gap} of {n} samples")
        valid = _block_mask(rng, n, gap, k)
    return MaskedSignal(signal, BinarySeries(signal.start, signal.rate_hz, valid))


def substream(seed: int, series_id: str, ratio: float, iteration: int) -> np.random.Generator:
    """Independent generator keyed by (series, ratio, iteration), stable across runs."""
    digest = hashlib.sha256(f"{series_id}\x1f{float(ratio)!r}\x1f{int(iteration)}".encode()).digest()
    words = np.frombuffer(digest[:16], dtype="<u4").tolist()
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *words]))


def _metric(values: np.ndarray, name: str) -> float:
    if name == "mean":
        return float(np.mean(values))
    q = float(_METRIC_RE.fullmatch(name).group(1))
    return float(np.percentile(values, q, method="linear"))


def compute_metrics(masked: MaskedSignal, metrics) -> dict[str, float]:
    """Metrics over valid samples only; percentiles interpolate linearly between order statistics."""
    for m in metrics:
        _check_metric(m)
    values = masked.signal.channel(0)[masked.valid.values]
    if values.size == 0:
        raise EmptyWindowError("no valid samples: window unusable")
    return {m: _metric(values, m) for m in metrics}


def bootstrap_spread(reference: UniformSignal, cfg: BootstrapConfig, series_id: str = "series",
                     jobs: int = 1, imputer=None) -> list[BootstrapRecord]:
    """Metric distributions under induced gaps at each retention ratio.

    Parameters
    ----------
    reference
        Gap-free series (its window of interest).
    imputer
        Optional ``MaskedSignal -> UniformSignal``; when given, metrics are
        computed on the imputed series instead of the retained samples.
    jobs
        Worker threads. Records come back canonically sorted by
        (series, metric, ratio, iteration), so output does not depend on it.
    """
    if len(reference) == 0:
        raise InvalidParameterError("reference series is empty")
    ref = compute_metrics(MaskedSignal.all_valid(reference), cfg.metrics)

    def one(task):
        ratio, it = task
        rng = substream(cfg.seed, series_id, ratio, it)
        masked = induce_gaps(reference, ratio, cfg.method, rng)
        if imputer is not None:
            masked = MaskedSignal.all_valid(imputer(masked))
        vals = compute_metrics(masked, cfg.metrics)
        return [BootstrapRecord(series_id, m, ratio, it, vals[m], ref[m]) for m in cfg.metrics]

    tasks = [(r, i) for r in cfg.retention_ratios for i in range(cfg.iterations)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(one, tasks))
    else:
        chunks = [one(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.series_id, r.metric, r.retention_ratio, r.iteration))
    return records


RECORD_COLUMNS = ("series_id", "metric", "retention_ratio", "iteration", "value", "reference_value")


def records_to_csv(records) -> str:
    """CSV text with shortest round-trip float formatting."""
    buf = io.StringIO()
    buf.write(",".join(RECORD_COLUMNS) + "\n")
    for r in records:
        buf.write(f"{r.series_id},{r.metric},{r.retention_ratio!r},{r.iteration},"
                  f"{r.value!r},{r.reference_value!r}\n")
    return buf.getvalue()


def _bin_label(b: int, bin_s: float) -> str:
    def hhmm(s):
        s = int(round(s))
        return f"{s // 3600:02d}:{s % 3600 // 60:02d}"
    return f"{hhmm(b * bin_s)}-{hhmm(min(86400, (b + 1) * bin_s))}"


def median_tod_impute(masked: MaskedSignal, profile_source, bin_s: float = 1800.0,
                      tz="UTC") -> UniformSignal:
    """Fill invalid samples with the median of valid profile samples in the same time-of-day bin.

    Raises
    ------
    ImputationError
        When a bin that needs filling has no valid profile samples; the
        message lists those bins.
    """
    if not 0 < bin_s <= 86400:
        raise InvalidParameterError("bin_s must lie in (0, 86400]")
    tz = get_tz(tz)
    n_bins = int(math.ceil(86400.0 / bin_s - 1e-9))
    x = np.array(masked.signal.channel(0), dtype=float)
    invalid = ~masked.valid.values
    if not invalid.any():
        return masked.signal

    def bins_of(sig: UniformSignal) -> np.ndarray:
        b = np.floor(seconds_of_day(sig.times(), tz) / bin_s).astype(np.int64)
        return np.minimum(b, n_bins - 1)

    pools: list[list[np.ndarray]] = [[] for _ in range(n_bins)]
    for src in profile_source:
        b = bins_of(src.signal)[src.valid.values]
        v = src.signal.channel(0)[src.valid.values]
        order = np.argsort(b, kind="stable")
        b, v = b[order], v[order]
        cuts = np.flatnonzero(np.diff(b)) + 1
        for bb, vv in zip(np.split(b, cuts), np.split(v, cuts)):
            if bb.size:
                pools[int(bb[0])].append(vv)

    need = bins_of(masked.signal)[invalid]
    needed = np.unique(need)
    empty = [int(b) for b in needed if not pools[b]]
    if empty:
        raise ImputationError(
            "no profile data for time-of-day bin(s): " + ", ".join(_bin_label(b, bin_s) for b in empty))
    medians = np.full(n_bins, np.nan)
    for b in needed:
        medians[b] = np.median(np.concatenate(pools[b]))
    x[invalid] = medians[need]
    return UniformSignal(masked.signal.start, masked.signal.rate_hz, x, masked.signal.unit)


def tod_imputer(profile_source, bin_s: float = 1800.0, tz="UTC"):
    """Imputer for :func:`bootstrap_spread` backed by :func:`median_tod_impute`."""
    def impute(masked: MaskedSignal) -> UniformSignal:
        return median_tod_impute(masked, profile_source, bin_s, tz)
    return impute
