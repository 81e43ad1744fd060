"""Exception types shared across the package."""


class PrimeflowError(Exception):
    """Base class for all package-specific errors."""


class PrecisionError(PrimeflowError):
    """A requested tolerance cannot be met with the available approximants."""


class BudgetExhaustedError(PrimeflowError):
    """A search or step budget was exceeded.

    This is expected behavior at desk scale: denominator growth is doubly
    exponential, so deep levels are unreachable by design, not by accident.
    """


class AmbiguousBoundaryError(PrimeflowError):
    """A flow time lands within tolerance of a roof boundary.

    The step count is then not certain; callers decide how to proceed
    instead of the library silently picking a side.
    """


class PositivityError(PrimeflowError):
    """A function that must be certified positive failed certification."""


class QuadratureError(PrimeflowError):
    """Node doubling changed a quadrature result beyond tolerance."""


class FitError(PrimeflowError):
    """An exponential-majorant fit is underdetermined or has the wrong sign."""


class ConfigError(PrimeflowError):
    """Malformed configuration text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", column {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class ValidationError(PrimeflowError):
    """A configuration value violates an invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
