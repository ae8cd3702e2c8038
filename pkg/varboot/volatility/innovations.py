"""Module contains innovation laws with unit second moment."""
from __future__ import annotations

import math
from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from typing import Any
from typing import Callable

import numpy as np
from scipy import integrate
from scipy import stats

from .._typing import FloatArray
from ..exceptions import NumericalError
from ..exceptions import ParameterDomainError


__all__ = (
    "InnovationDist",
    "StandardNormal",
    "NormalizedStudentT",
    "make_dist",
    "truncated_second_moment",
)


def truncated_second_moment(
    pdf: Callable[[float], float],
    upper: float,
) -> float:
    """Integrate x**2 * pdf(x) over (-inf, upper] adaptively."""
    value, error = integrate.quad(
        lambda x: x * x * pdf(x),
        -np.inf,
        upper,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=500,
    )
    if not math.isfinite(value) or error > 1e-8:
        msg = f"Quadrature did not converge (estimate {value}, error {error})."
        raise NumericalError(msg)
    return float(value)


class InnovationDist(ABC):
    """Law F of the standardized innovations, E[eta**2] = 1."""

    name: str

    @property
    @abstractmethod
    def law(self) -> Any:
        """Frozen scipy distribution."""
        ...

    @property
    @abstractmethod
    def kurtosis(self) -> float:
        """Fourth moment E[eta**4]."""
        ...

    @abstractmethod
    def draw(self, rng: np.random.Generator, size: int) -> FloatArray:
        """Draw i.i.d. innovations."""
        ...

    def cdf(self, x: float) -> float:
        """Distribution function."""
        return float(self.law.cdf(x))

    def pdf(self, x: float) -> float:
        """Density."""
        return float(self.law.pdf(x))

    def ppf(self, q: float) -> float:
        """Quantile function."""
        return float(self.law.ppf(q))

    def partial_second_moment(self, upper: float) -> float:
        """E[eta**2 * 1{eta < upper}]."""
        return truncated_second_moment(self.pdf, upper)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {"name": self.name}


@dataclass(frozen=True)
class StandardNormal(InnovationDist):
    """Standard normal innovations."""

    name = "normal"

    @property
    def law(self) -> Any:
        """Frozen scipy law."""
        return stats.norm()

    @property
    def kurtosis(self) -> float:
        """Fourth moment."""
        return 3.0

    def draw(self, rng: np.random.Generator, size: int) -> FloatArray:
        """Standard normal draws."""
        return rng.standard_normal(size)

    def partial_second_moment(self, upper: float) -> float:
        """E[eta^2 1{eta <= c}] in closed form."""
        # Phi(c) - c*phi(c)
        return float(stats.norm.cdf(upper) - upper * stats.norm.pdf(upper))


@dataclass(frozen=True)
class NormalizedStudentT(InnovationDist):
    """Student-t innovations rescaled to unit variance."""

    nu: int
    name = "t"

    def __post_init__(self) -> None:
        """Need a finite fourth moment."""
        if isinstance(self.nu, bool) or int(self.nu) != self.nu or self.nu <= 4:
            msg = f"Student-t degrees of freedom must be an integer > 4, got {self.nu}."
            raise ParameterDomainError(msg)

    @property
    def scale(self) -> float:
        """Inverse standard deviation of the raw t law."""
        return math.sqrt((self.nu - 2) / self.nu)

    @property
    def law(self) -> Any:
        """Frozen scipy law rescaled to unit variance."""
        return stats.t(df=self.nu, scale=self.scale)

    @property
    def kurtosis(self) -> float:
        """Fourth moment."""
        return 3.0 * (self.nu - 2) / (self.nu - 4)

    def draw(self, rng: np.random.Generator, size: int) -> FloatArray:
        """Unit-variance Student t draws."""
        return rng.standard_t(self.nu, size) * self.scale

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {"name": self.name, "nu": int(self.nu)}


def make_dist(name: str, nu: int = 6) -> InnovationDist:
    """Build innovation law by name ('normal' or 't')."""
    key = name.lower()
    if key in {"normal", "gaussian", "norm"}:
        return StandardNormal()
    if key in {"t", "student", "student-t", "studentt"}:
        return NormalizedStudentT(nu)
    msg = f"Unknown innovation law '{name}'."
    raise ParameterDomainError(msg)
