"""Forecastability diagnostics for time series: spectral predictability and
the largest Lyapunov exponent, computed before any model is trained."""

__version__ = "0.1.0"

from .errors import ForecastabilityError
from .lyapunov import (EmbeddingConfig, LyapunovEstimate, Sufficiency, delay_embed,
                       largest_lyapunov, moving_lyapunov, nearest_neighbor, sufficiency_check)
from .spectral import (PowerDistribution, SpectralConfig, hann_window, moving_spectral_predictability,
                       power_distribution, spectral_entropy, spectral_predictability)
from .timeseries import (Frequency, TimeSeries, WindowPlan, detrend_linear, iterate_windows,
                         resample_weekly, sparsity_of)
