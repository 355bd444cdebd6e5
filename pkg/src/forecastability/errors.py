"""Exception types raised across the package.

Every error is a ``ValueError`` subclass so callers that only care about bad
input can catch that. The CLI maps :class:`DataError` to exit code 2 and any
other :class:`ForecastabilityError` to exit code 3.
"""


class ForecastabilityError(ValueError):
    pass


class DataError(ForecastabilityError):
    """Malformed, missing or inconsistent input data."""


class DegenerateInputError(ForecastabilityError):
    pass


class InvalidFrequencyError(ForecastabilityError):
    pass


class WindowSizeError(ForecastabilityError):
    """Window larger than the series, or too small for the estimator."""


class SeriesTooShortError(ForecastabilityError):
    pass


class DegenerateSpectrumError(ForecastabilityError):
    pass


class EmbeddingInfeasibleError(ForecastabilityError):
    pass


class EstimationImpossibleError(ForecastabilityError):
    """No admissible state pair exists for a Lyapunov estimate."""


class AliasingError(ForecastabilityError):
    pass


class DivergenceError(ForecastabilityError):
    pass


class UndefinedDenominatorError(ForecastabilityError):
    pass


class UndefinedCorrelationError(ForecastabilityError):
    pass
