"""Sorted, disjoint, half-open time intervals.

An :class:`IntervalSet` is the currency for wear bouts, recording sessions,
windows-of-interest and label spans. Every constructor canonicalizes its
input: empty intervals are dropped, overlapping or touching intervals are
merged, and the result is sorted by start time.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator

import numpy as np

from .errors import InvalidParameterError

__all__ = ["IntervalSet"]


def _canonical(starts: np.ndarray, ends: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = ends > starts
    starts, ends = starts[keep], ends[keep]
    if starts.size == 0:
        return starts, ends
    order = np.argsort(starts, kind="stable")
    starts, ends = starts[order], ends[order]
    reach = np.maximum.accumulate(ends)
    # a new run begins where the start lies strictly past everything seen so far
    new_run = np.empty(starts.size, dtype=bool)
    new_run[0] = True
    new_run[1:] = starts[1:] > reach[:-1]
    first = np.flatnonzero(new_run)
    last = np.append(first[1:] - 1, starts.size - 1)
    return starts[first], reach[last]


def _sweep(sets: list[IntervalSet], need: int) -> IntervalSet:
    """Regions covered by at least ``need`` of the given canonical sets."""
    starts = np.concatenate([s.starts for s in sets])
    ends = np.concatenate([s.ends for s in sets])
    if starts.size == 0:
        return IntervalSet()
    times = np.concatenate([starts, ends])
    delta = np.concatenate([np.ones(starts.size, int), -np.ones(ends.size, int)])
    # at equal times close before opening: half-open intervals that touch do not overlap
    order = np.lexsort((delta, times))
    times, delta = times[order], delta[order]
    depth = np.cumsum(delta)
    inside = depth >= need
    seg_start = times[:-1][inside[:-1]]
    seg_end = times[1:][inside[:-1]]
    return IntervalSet._from_arrays(seg_start, seg_end)


class IntervalSet:
    """Canonical set of half-open intervals ``[start, end)`` in seconds.

    Parameters
    ----------
    intervals : iterable of (start, end) pairs, optional
        Any order, may overlap. Pairs with ``start == end`` are dropped.

    Raises
    ------
    InvalidParameterError
        If a pair has ``start > end`` or a non-finite bound.
    """

    __slots__ = ("_starts", "_ends")

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        arr = np.asarray(list(intervals), dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("interval bounds must be finite")
        if np.any(arr[:, 0] > arr[:, 1]):
            bad = arr[arr[:, 0] > arr[:, 1]][0]
            raise InvalidParameterError(f"interval start after end: {tuple(bad)}")
        self._set(*_canonical(arr[:, 0].copy(), arr[:, 1].copy()))

    def _set(self, starts, ends):
        starts.setflags(write=False)
        ends.setflags(write=False)
        self._starts = starts
        self._ends = ends

    @classmethod
    def _from_arrays(cls, starts, ends) -> IntervalSet:
        obj = cls.__new__(cls)
        obj._set(*_canonical(np.asarray(starts, float), np.asarray(ends, float)))
        return obj

    @classmethod
    def from_arrays(cls, starts, ends) -> IntervalSet:
        starts = np.asarray(starts, dtype=float)
        ends = np.asarray(ends, dtype=float)
        return cls(zip(starts.tolist(), ends.tolist()))

    @property
    def starts(self) -> np.ndarray:
        return self._starts

    @property
    def ends(self) -> np.ndarray:
        return self._ends

    def __len__(self) -> int:
        return int(self._starts.size)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(zip(self._starts.tolist(), self._ends.tolist()))

    def __bool__(self) -> bool:
        return self._starts.size > 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self._starts, other._starts) and np.array_equal(
            self._ends, other._ends
        )

    def __hash__(self):
        return hash((self._starts.tobytes(), self._ends.tobytes()))

    def __repr__(self) -> str:
        inner = ", ".join(f"[{s!r}, {e!r})" for s, e in self)
        return f"IntervalSet({{{inner}}})"

    def to_list(self) -> list[list[float]]:
        return [[s, e] for s, e in self]

    @property
    def span(self) -> tuple[float, float] | None:
        """``(first start, last end)``, or None when empty."""
        if not self:
            return None
        return float(self._starts[0]), float(self._ends[-1])

    def total_duration(self) -> float:
        return float(np.sum(self._ends - self._starts))

    def union(self, *others: IntervalSet) -> IntervalSet:
        return _sweep([self, *others], 1)

    def intersect(self, *others: IntervalSet) -> IntervalSet:
        sets = [self, *others]
        if any(not s for s in sets):
            return IntervalSet()
        return _sweep(sets, len(sets))

    def clip(self, lo: float, hi: float) -> IntervalSet:
        if hi <= lo:
            return IntervalSet()
        return IntervalSet._from_arrays(
            np.clip(self._starts, lo, hi), np.clip(self._ends, lo, hi)
        )

    def complement_within(self, lo: float, hi: float) -> IntervalSet:
        inner = self.clip(lo, hi)
        starts = np.concatenate([[lo], inner.ends])
        ends = np.concatenate([inner.starts, [hi]])
        return IntervalSet._from_arrays(starts, ends)

    def covered(self, lo: float, hi: float) -> float:
        """Duration of ``[lo, hi)`` covered by the set (no allocation of a new set)."""
        if hi <= lo or not self:
            return 0.0
        return float(
            np.sum(np.clip(self._ends, lo, hi) - np.clip(self._starts, lo, hi))
        )
