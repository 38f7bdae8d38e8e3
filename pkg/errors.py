"""
Exceptions and warnings raised by the model modules.

Every exception carries the exit code the command line reports for it.
"""
from config import EXIT_CODES


class ModelError(Exception):
    """Base class for all errors raised by this project."""

    exit_code = EXIT_CODES['numerical']


class DataIOError(ModelError):
    """A file is missing or cannot be read."""

    exit_code = EXIT_CODES['io']


class ParseError(ModelError):
    """Input text does not follow the expected schema."""

    exit_code = EXIT_CODES['io']


class InsufficientDataError(ModelError):
    """Too few valid observations for the requested operation."""

    exit_code = EXIT_CODES['data']


class DegenerateSampleError(ModelError):
    """The sample has zero variance, so a ratio of moments is undefined."""

    exit_code = EXIT_CODES['data']


class NotLeptokurticError(ModelError):
    """
    The data have no positive excess kurtosis.

    Signals the caller to fall back to the normal model.
    """

    exit_code = EXIT_CODES['data']

    def __init__(self, excess_kurtosis: float):
        super().__init__(
            f"Excess kurtosis {excess_kurtosis:.6g} is not positive; "
            "the retention model cannot be calibrated."
        )
        self.excess_kurtosis = excess_kurtosis


class DomainError(ModelError, ValueError):
    """An argument lies outside the domain of a formula."""


class NumericalConfigError(ModelError):
    """A solver configuration is unstable or incomplete."""

    def __init__(self, message: str, ratio: float | None = None):
        super().__init__(message)
        self.ratio = ratio


class ResourceLimitError(ModelError):
    """An exact computation would exceed the configured memory cap."""


class AccuracyWarning(UserWarning):
    """A numerical result is usable but outside its accuracy target."""


class ModelFallbackWarning(UserWarning):
    """A model was replaced by a simpler one."""
