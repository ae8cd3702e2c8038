"""Module contains conditional volatility model specifications."""
from __future__ import annotations

from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from typing import Any
from typing import ClassVar
from typing import Iterable

import numpy as np

from .._typing import FloatArray
from ..enumcls import ModelFamily
from ..enumcls import PresampleRule
from ..exceptions import ParameterDomainError


__all__ = (
    "ModelSpec",
    "Garch11",
    "TGarch11",
    "build_spec",
    "spec_type",
)


class ModelSpec(ABC):
    """Parameter vector of a GARCH-type recursion.

    The recursion runs on the model's own scale: variances for GARCH
    (``power == 2``) and volatilities for T-GARCH (``power == 1``).
    """

    family: ClassVar[ModelFamily]
    names: ClassVar[tuple[str, ...]]
    power: ClassVar[int]

    omega: float
    beta: float

    def _validate(self) -> None:
        """Check finiteness and the parameter box."""
        values = self.params
        if not np.all(np.isfinite(values)):
            msg = f"{self.family.value}: parameters must be finite, got {values}."
            raise ParameterDomainError(msg)
        if self.omega <= 0:
            msg = f"{self.family.value}: omega must be positive, got {self.omega}."
            raise ParameterDomainError(msg)
        for name in self.names[1:-1]:
            if getattr(self, name) < 0:
                msg = f"{self.family.value}: {name} must be non-negative."
                raise ParameterDomainError(msg)
        if not 0 <= self.beta < 1:
            msg = f"{self.family.value}: beta must lie in [0, 1), got {self.beta}."
            raise ParameterDomainError(msg)

    @property
    def params(self) -> FloatArray:
        """Parameter vector in the fixed order of ``names``."""
        return np.array([getattr(self, name) for name in self.names])

    @property
    def r(self) -> int:
        """Parameter count."""
        return len(self.names)

    @classmethod
    def from_params(cls, values: Iterable[float]) -> ModelSpec:
        """Build spec from a parameter vector."""
        items = [float(value) for value in values]
        if len(items) != len(cls.names):
            msg = "{} expects {} parameters, got {}.".format(
                cls.__name__,
                len(cls.names),
                len(items),
            )
            raise ParameterDomainError(msg)
        return cls(*items)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        data: dict[str, Any] = {"family": self.family.value}
        data.update({name: float(getattr(self, name)) for name in self.names})
        return data

    @abstractmethod
    def drive(self, eps: FloatArray) -> FloatArray:
        """Return-driven part of the next level, elementwise."""
        ...

    @abstractmethod
    def drive_jacobian(self, eps: FloatArray) -> FloatArray:
        """Derivative of ``drive`` w.r.t. every parameter except beta."""
        ...

    @abstractmethod
    def step(self, level: float, eps: float) -> float:
        """One step of the recursion on the model scale."""
        ...

    @abstractmethod
    def start_level(self) -> float:
        """Unconditional level used to start exact simulation."""
        ...

    @abstractmethod
    def rescaled(self, factor: float) -> ModelSpec:
        """Parameters matching returns multiplied by ``factor``."""
        ...

    def presample_level(self, eps: FloatArray, rule: PresampleRule) -> float:
        """Initial level of the truncated filter."""
        if rule is PresampleRule.stationary:
            return float(np.mean(self.drive(eps))) / (1.0 - self.beta)
        second_moment = float(np.mean(np.square(eps)))
        return second_moment ** (self.power / 2)

    def presample_gradient(
        self,
        eps: FloatArray,
        rule: PresampleRule,
        level: float,
    ) -> FloatArray:
        """Gradient of the initial level; zero unless it depends on theta."""
        if rule is not PresampleRule.stationary:
            return np.zeros(self.r)
        means = np.mean(self.drive_jacobian(eps), axis=0)
        return np.append(means, level) / (1.0 - self.beta)


@dataclass(frozen=True)
class Garch11(ModelSpec):
    """GARCH(1,1): sigma2[t+1] = omega + alpha*eps[t]**2 + beta*sigma2[t]."""

    family: ClassVar[ModelFamily] = ModelFamily.garch
    names: ClassVar[tuple[str, ...]] = ("omega", "alpha", "beta")
    power: ClassVar[int] = 2

    omega: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        """Check parameter box."""
        self._validate()

    def drive(self, eps: FloatArray) -> FloatArray:
        """omega + alpha * eps**2."""
        return self.omega + self.alpha * np.square(eps)

    def drive_jacobian(self, eps: FloatArray) -> FloatArray:
        """Columns for omega and alpha."""
        return np.column_stack((np.ones_like(eps), np.square(eps)))

    def step(self, level: float, eps: float) -> float:
        """Next variance."""
        return self.omega + self.alpha * eps * eps + self.beta * level

    def start_level(self) -> float:
        """Unconditional variance, or omega / (1 - beta) off the stationary region."""
        persistence = self.alpha + self.beta
        if persistence < 1:
            return self.omega / (1.0 - persistence)
        return self.omega / (1.0 - self.beta)

    def rescaled(self, factor: float) -> Garch11:
        """Parameters for scaled returns."""
        return Garch11(factor**2 * self.omega, self.alpha, self.beta)


@dataclass(frozen=True)
class TGarch11(ModelSpec):
    """T-GARCH(1,1) on volatilities with separate positive/negative parts."""

    family: ClassVar[ModelFamily] = ModelFamily.tgarch
    names: ClassVar[tuple[str, ...]] = (
        "omega",
        "alpha_plus",
        "alpha_minus",
        "beta",
    )
    power: ClassVar[int] = 1

    omega: float
    alpha_plus: float
    alpha_minus: float
    beta: float

    def __post_init__(self) -> None:
        """Check parameter box."""
        self._validate()

    def drive(self, eps: FloatArray) -> FloatArray:
        """omega + alpha+ * eps+ + alpha- * eps-."""
        return (
            self.omega
            + self.alpha_plus * np.maximum(eps, 0.0)
            + self.alpha_minus * np.maximum(-eps, 0.0)
        )

    def drive_jacobian(self, eps: FloatArray) -> FloatArray:
        """Columns for omega, alpha+ and alpha-."""
        return np.column_stack((
            np.ones_like(eps),
            np.maximum(eps, 0.0),
            np.maximum(-eps, 0.0),
        ))

    def step(self, level: float, eps: float) -> float:
        """Next volatility."""
        if eps >= 0:
            return self.omega + self.alpha_plus * eps + self.beta * level
        return self.omega - self.alpha_minus * eps + self.beta * level

    def start_level(self) -> float:
        """omega / (1 - beta)."""
        return self.omega / (1.0 - self.beta)

    def rescaled(self, factor: float) -> TGarch11:
        """Parameters for scaled returns."""
        return TGarch11(
            factor * self.omega,
            self.alpha_plus,
            self.alpha_minus,
            self.beta,
        )


_SPEC_TYPES: dict[ModelFamily, type[ModelSpec]] = {
    ModelFamily.garch: Garch11,
    ModelFamily.tgarch: TGarch11,
}


def spec_type(family: ModelFamily | str) -> type[ModelSpec]:
    """Spec class of a model family."""
    return _SPEC_TYPES[ModelFamily(family)]


def build_spec(family: ModelFamily | str, values: Iterable[float]) -> ModelSpec:
    """Build spec of ``family`` from a parameter vector."""
    return spec_type(family).from_params(values)
