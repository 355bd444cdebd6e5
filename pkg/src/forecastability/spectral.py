"""Spectral predictability (one minus normalized spectral entropy)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DegenerateSpectrumError, SeriesTooShortError
from .timeseries import TimeSeries, WindowPlan, as_series, detrend_linear, iterate_windows
from .windows import MovingMetric

MIN_SPECTRAL_LENGTH = 4
# detrended residuals this small relative to the input count as zero
ROUNDOFF = 1e-12


@dataclass(frozen=True)
class SpectralConfig:
    log_base: float = math.e
    apply_hann: bool = True
    apply_detrend: bool = True
    include_dc: bool = False
    # "bins" -> log_a(N); "two_pi" -> log_a(2*pi), the unbounded continuous-spectrum variant
    normalizer: str = "bins"

    def __post_init__(self):
        if not self.log_base > 1:
            raise ValueError(f"log_base must be > 1, got {self.log_base}")
        if self.normalizer not in ("bins", "two_pi"):
            raise ValueError(f"normalizer must be 'bins' or 'two_pi', got {self.normalizer!r}")


@dataclass(frozen=True)
class PowerDistribution:
    masses: np.ndarray
    degenerate: bool = False

    @property
    def bin_count(self) -> int:
        return int(self.masses.size)

    @classmethod
    def from_masses(cls, masses) -> "PowerDistribution":
        p = np.asarray(masses, dtype=np.float64)
        if p.ndim != 1 or p.size < 1 or np.any(p < 0):
            raise ValueError("masses must be a non-empty vector of non-negative numbers")
        total = p.sum()
        if total <= 0:
            return cls(np.zeros_like(p), degenerate=True)
        return cls(p / total)


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann taper with zero endpoints; ``[1.0]`` for ``n == 1``."""
    if n <= 0:
        raise DegenerateInputError(f"window length must be positive, got {n}")
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))


def power_distribution(series, config: SpectralConfig = SpectralConfig()) -> PowerDistribution:
    """Normalized one-sided periodogram.

    Bins 1..floor(T/2) are kept (the Nyquist bin included for even T); the DC
    bin is prepended only when ``config.include_dc``. A total power below
    ``1e-30 * T``, or detrended residuals no larger than ``ROUNDOFF`` times the
    input's peak magnitude, marks the distribution degenerate.
    """
    series = as_series(series)
    T = len(series)
    if T < MIN_SPECTRAL_LENGTH:
        raise SeriesTooShortError(f"spectral analysis needs T >= {MIN_SPECTRAL_LENGTH}, got {T}")
    y = detrend_linear(series).values if config.apply_detrend else series.values
    # residuals of an exactly linear input are round-off, not signal
    roundoff = config.apply_detrend and np.abs(y).max() <= ROUNDOFF * np.abs(series.values).max()
    if config.apply_hann:
        y = y * hann_window(T)
    power = np.abs(np.fft.rfft(y)) ** 2
    if not config.include_dc:
        power = power[1:]
    total = power.sum()
    if roundoff or not total >= 1e-30 * T:
        return PowerDistribution(np.zeros_like(power), degenerate=True)
    return PowerDistribution(power / total)


def spectral_entropy(dist: PowerDistribution, a: float = math.e) -> float:
    """Shannon entropy ``-sum p log_a p`` with ``0 log 0 = 0``."""
    if dist.degenerate:
        raise DegenerateSpectrumError("entropy of an all-zero spectrum is undefined")
    p = dist.masses[dist.masses > 0]
    h = -float(np.sum(p * np.log(p))) / math.log(a)
    return max(h, 0.0)


def _normalizer(n_bins: int, config: SpectralConfig) -> float:
    if config.normalizer == "two_pi":
        return math.log(2.0 * math.pi) / math.log(config.log_base)
    return math.log(n_bins) / math.log(config.log_base)


def omega_from_distribution(dist: PowerDistribution, config: SpectralConfig = SpectralConfig()) -> float:
    if dist.degenerate:
        return 1.0
    if dist.bin_count == 1:
        return 1.0
    h = spectral_entropy(dist, config.log_base)
    omega = 1.0 - h / _normalizer(dist.bin_count, config)
    if config.normalizer == "bins":
        omega = min(max(omega, 0.0), 1.0)
    return omega


def spectral_predictability(series, config: SpectralConfig = SpectralConfig()) -> float:
    """Score in [0, 1]; 1 for a flat (degenerate) spectrum after detrending,
    near 0 for white noise."""
    return omega_from_distribution(power_distribution(series, config), config)


def moving_spectral_predictability(series, plan: WindowPlan,
                                   config: SpectralConfig = SpectralConfig()) -> MovingMetric:
    series = as_series(series)
    if plan.window_size < MIN_SPECTRAL_LENGTH:
        raise SeriesTooShortError(
            f"spectral windows need at least {MIN_SPECTRAL_LENGTH} samples, got {plan.window_size}")
    vals = [spectral_predictability(w, config) for w in iterate_windows(series, plan)]
    return MovingMetric.build(series, plan, vals, name="omega")
