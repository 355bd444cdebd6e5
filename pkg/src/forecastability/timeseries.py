"""Series container and the preprocessing shared by both metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .errors import DegenerateInputError, InvalidFrequencyError, WindowSizeError


class Frequency(str, Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    UNITLESS = "unitless"


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued series.

    ``values`` is stored as a read-only float64 array. ``frequency`` is a
    label only; it never changes a numeric result.
    """

    values: np.ndarray
    id: str = ""
    start_index: int = 0
    frequency: Frequency = Frequency.UNITLESS
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size < 1:
            raise DegenerateInputError("a series needs at least one value")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise DegenerateInputError(f"non-finite value at position {bad} in series {self.id!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "frequency", Frequency(self.frequency))

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values, **changes) -> "TimeSeries":
        kwargs = dict(id=self.id, start_index=self.start_index, frequency=self.frequency)
        kwargs.update(changes)
        return TimeSeries(values, **kwargs)


def as_series(y) -> TimeSeries:
    """Wrap arrays and lists; pass a :class:`TimeSeries` through."""
    if isinstance(y, TimeSeries):
        return y
    return TimeSeries(y)


@dataclass(frozen=True)
class WindowPlan:
    window_size: int
    stride: int = 1
    alignment: str = "window_end"

    def __post_init__(self):
        if self.window_size < 1:
            raise WindowSizeError(f"window_size must be >= 1, got {self.window_size}")
        if self.stride < 1:
            raise WindowSizeError(f"stride must be >= 1, got {self.stride}")
        if self.alignment != "window_end":
            raise ValueError(f"unsupported alignment {self.alignment!r}")

    def count(self, length: int) -> int:
        if self.window_size > length:
            raise WindowSizeError(
                f"window of {self.window_size} does not fit a series of length {length}")
        return (length - self.window_size) // self.stride + 1

    def offsets(self, length: int) -> range:
        return range(0, self.count(length) * self.stride, self.stride)


def detrend_linear(series) -> TimeSeries:
    """Remove the ordinary least-squares line fitted against 0..T-1."""
    series = as_series(series)
    y = series.values
    n = y.size
    if n < 2:
        raise DegenerateInputError("detrending needs at least two samples")
    t = np.arange(n, dtype=np.float64)
    t_c = t - t.mean()
    y_mean = y.mean()
    slope = np.dot(t_c, y - y_mean) / np.dot(t_c, t_c)
    resid = (y - y_mean) - slope * t_c
    return series.with_values(resid)


def sparsity_of(series) -> float:
    """Fraction of entries that are exactly zero."""
    y = as_series(series).values
    return float(np.count_nonzero(y == 0.0)) / y.size


def resample_weekly(series: TimeSeries) -> TimeSeries:
    """Sum non-overlapping 7-sample blocks; a trailing partial block is dropped."""
    if series.frequency != Frequency.DAILY:
        raise InvalidFrequencyError(
            f"weekly resampling needs a daily series, got {series.frequency.value}")
    n_weeks = len(series) // 7
    if n_weeks < 1:
        raise DegenerateInputError("weekly resampling needs at least 7 daily values")
    weeks = series.values[: 7 * n_weeks].reshape(n_weeks, 7).sum(axis=1)
    return series.with_values(weeks, frequency=Frequency.WEEKLY,
                              start_index=series.start_index // 7)


def iterate_windows(series, plan: WindowPlan) -> Iterator[TimeSeries]:
    """Yield contiguous windows ``[k*stride, k*stride + W)``.

    Each window's ``start_index`` is absolute; the index a windowed metric is
    stamped at is ``start_index + W - 1``.
    """
    series = as_series(series)
    W = plan.window_size
    for off in plan.offsets(len(series)):
        yield series.with_values(series.values[off:off + W],
                                 start_index=series.start_index + off)


def window_end_indices(series, plan: WindowPlan) -> np.ndarray:
    series = as_series(series)
    offs = np.asarray(plan.offsets(len(series)), dtype=np.int64)
    return series.start_index + offs + plan.window_size - 1
