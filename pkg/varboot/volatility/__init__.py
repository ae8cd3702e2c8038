"""Module contains volatility models, simulation and filtering."""
from .filters import SIGMA_FLOOR
from .filters import ReturnSeries
from .filters import SigmaPath
from .filters import SimulatedPath
from .filters import filter_sigma
from .filters import sigma_gradient
from .filters import simulate_path
from .filters import simulate_recursion
from .innovations import InnovationDist
from .innovations import NormalizedStudentT
from .innovations import StandardNormal
from .innovations import make_dist
from .innovations import truncated_second_moment
from .models import Garch11
from .models import ModelSpec
from .models import TGarch11
from .models import build_spec
from .models import spec_type


__all__ = (
    "SIGMA_FLOOR",
    "ReturnSeries",
    "SigmaPath",
    "SimulatedPath",
    "filter_sigma",
    "sigma_gradient",
    "simulate_path",
    "simulate_recursion",
    "InnovationDist",
    "NormalizedStudentT",
    "StandardNormal",
    "make_dist",
    "truncated_second_moment",
    "Garch11",
    "ModelSpec",
    "TGarch11",
    "build_spec",
    "spec_type",
)
