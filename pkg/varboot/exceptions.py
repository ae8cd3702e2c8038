"""Module contains lib exceptions."""


__all__ = (
    "VarBootError",
    "ParameterDomainError",
    "DataError",
    "PriceParseError",
    "PriceValidationError",
    "SampleSizeError",
    "SingularDensityError",
    "ConditioningError",
    "NumericalError",
    "AllReplicatesFailedError",
    "ConfigError",
)


class VarBootError(Exception):
    """Base error of the package."""

    exit_code = 1


class ParameterDomainError(VarBootError, ValueError):
    """Parameter outside of its admissible domain."""

    exit_code = 3


class DataError(VarBootError, ValueError):
    """Input data can not be used."""

    exit_code = 4


class PriceParseError(DataError):
    """Price file could not be parsed."""

    def __init__(self, msg: str, line: int | None = None) -> None:
        """Keep line number of the offending row."""
        self.line = line
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class PriceValidationError(DataError):
    """Parsed prices break series invariants."""


class SampleSizeError(DataError):
    """Not enough observations or replicates."""


class NumericalError(VarBootError, ArithmeticError):
    """Numerical procedure failed."""

    exit_code = 5


class SingularDensityError(NumericalError):
    """Kernel density estimate is zero at the evaluation point."""


class ConditioningError(NumericalError):
    """Matrix is too ill-conditioned to invert."""

    def __init__(self, msg: str, condition_number: float) -> None:
        """Keep condition number."""
        self.condition_number = condition_number
        super().__init__(msg)


class AllReplicatesFailedError(NumericalError):
    """Every bootstrap replicate failed."""


class ConfigError(VarBootError):
    """Bad configuration file or flag."""

    exit_code = 2
