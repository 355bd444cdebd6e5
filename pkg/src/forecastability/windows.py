from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .timeseries import TimeSeries, WindowPlan, window_end_indices


@dataclass(frozen=True)
class MovingMetric:
    """Per-window metric values stamped at each window's last index.

    Windows where the estimator could not produce a value hold NaN in
    ``values`` and are listed in ``gaps``; they are never filled in.
    """

    end_index: np.ndarray
    values: np.ndarray
    window_size: int
    stride: int
    name: str = ""

    @classmethod
    def build(cls, series: TimeSeries, plan: WindowPlan, values, name: str = "") -> "MovingMetric":
        vals = np.asarray(values, dtype=np.float64)
        return cls(window_end_indices(series, plan), vals, plan.window_size, plan.stride, name)

    def __len__(self) -> int:
        return self.values.size

    @property
    def gaps(self) -> np.ndarray:
        return self.end_index[np.isnan(self.values)]

    @property
    def start_index(self) -> np.ndarray:
        return self.end_index - self.window_size + 1

    def as_series(self, id: str = "") -> TimeSeries:
        """Gap-free values as a :class:`TimeSeries`; raises if any window is a gap."""
        if np.isnan(self.values).any():
            raise ValueError(f"{self.gaps.size} gap window(s); use .values and .gaps instead")
        return TimeSeries(self.values, id=id or self.name, start_index=int(self.end_index[0]))
