"""Module contains lib enum cls."""
from enum import Enum


__all__ = (
    "ResultFetch",
    "ModelFamily",
    "Design",
    "EstimatorMode",
    "PresampleRule",
    "IntervalKind",
    "DataFormat",
)


class ResultFetch(Enum):
    """Enum for fetching data from the result store."""

    fetchmany = "fetchmany"
    fetchall = "fetchall"
    fetchone = "fetchone"


class ModelFamily(Enum):
    """Conditional volatility model family."""

    garch = "garch"
    tgarch = "tgarch"


class Design(Enum):
    """Residual bootstrap design."""

    fixed = "fixed"
    recursive = "recursive"


class EstimatorMode(Enum):
    """How the bootstrap parameter estimate is obtained."""

    full_qmle = "full-qmle"
    newton_raphson = "newton-raphson"


class PresampleRule(Enum):
    """Initialization of the truncated volatility filter."""

    sample_moment = "sample-moment"
    stationary = "stationary"


class IntervalKind(Enum):
    """Confidence interval construction."""

    ep = "ep"
    rt = "rt"
    sy = "sy"
    asy = "asy"


class DataFormat(Enum):
    """Price file format."""

    csv = "csv"
    json = "json"
