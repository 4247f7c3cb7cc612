"""Local-volatility decomposition and Wiener-deviation analysis of nonlinear time series."""

__version__ = "0.1.0"


# ---------------------------
# Errors (define FIRST so submodules can import safely)
# ---------------------------


class VoldecompError(Exception):
    """Base class for every error the toolkit raises on purpose."""

    exit_code = 1


class UsageError(VoldecompError):
    """Bad invocation: missing inputs, invalid flags, bad environment values."""

    exit_code = 2


class DataError(VoldecompError, ValueError):
    """Input data violates a documented precondition."""

    exit_code = 3

    def __init__(self, message: str, *, index: int | None = None, line: int | None = None) -> None:
        super().__init__(message)
        self.index = index
        self.line = line


class NumericalError(VoldecompError, ArithmeticError):
    """A computation degenerated (zero dispersion, empty fit, undefined logs)."""

    exit_code = 4


__all__ = [
    "__version__",
    "VoldecompError",
    "UsageError",
    "DataError",
    "NumericalError",
]
