"""Module contains confidence interval value type."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .exceptions import ParameterDomainError


__all__ = (
    "Interval",
    "check_gamma",
)


def check_gamma(gamma: float) -> None:
    """Raise unless 0 < gamma < 1."""
    if not 0 < gamma < 1:
        msg = f"gamma must lie in (0, 1), got {gamma}."
        raise ParameterDomainError(msg)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]."""

    lo: float
    hi: float
    flagged: bool = False

    def __post_init__(self) -> None:
        """Check ordering."""
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            msg = f"Invalid interval [{self.lo}, {self.hi}]."
            raise ParameterDomainError(msg)

    @property
    def length(self) -> float:
        """Upper minus lower bound."""
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        """Center of the interval."""
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float) -> bool:
        """Closed interval membership."""
        return self.lo <= value <= self.hi

    def position(self, value: float) -> int:
        """-1 when ``value`` lies below, 1 when above, 0 inside."""
        if value < self.lo:
            return -1
        if value > self.hi:
            return 1
        return 0

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        data: dict[str, Any] = {"lo": self.lo, "hi": self.hi}
        if self.flagged:
            data["flagged"] = True
        return data
