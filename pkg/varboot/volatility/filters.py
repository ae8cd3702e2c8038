"""Module contains return series, simulation and the truncated filter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

from .._typing import FloatArray
from ..enumcls import PresampleRule
from ..exceptions import ParameterDomainError
from ..exceptions import SampleSizeError
from ..seeding import make_rng
from .innovations import InnovationDist
from .models import ModelSpec


__all__ = (
    "SIGMA_FLOOR",
    "ReturnSeries",
    "SigmaPath",
    "SimulatedPath",
    "simulate_recursion",
    "simulate_path",
    "filter_sigma",
    "sigma_gradient",
)


SIGMA_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Log-returns eps_1..eps_n with optional date labels."""

    values: FloatArray
    dates: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        """Freeze values and check them."""
        values = np.array(self.values, dtype=float).ravel()
        if values.size == 0:
            msg = "Return series must not be empty."
            raise SampleSizeError(msg)
        if not np.all(np.isfinite(values)):
            msg = "Return series contains non-finite values."
            raise ParameterDomainError(msg)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.dates is not None:
            dates = tuple(str(date) for date in self.dates)
            if len(dates) != values.size:
                msg = "Dates and returns must have equal length."
                raise ParameterDomainError(msg)
            object.__setattr__(self, "dates", dates)

    @property
    def n(self) -> int:
        """Sample size."""
        return int(self.values.size)

    def __len__(self) -> int:
        """Number of returns."""
        return self.n

    def require(self, minimum: int) -> None:
        """Raise when the series is shorter than ``minimum``."""
        if self.n < minimum:
            msg = f"Need at least {minimum} returns, got {self.n}."
            raise SampleSizeError(msg)

    def window(self, start: int, length: int) -> ReturnSeries:
        """Sub-series [start, start + length)."""
        stop = start + length
        dates = self.dates[start:stop] if self.dates is not None else None
        return ReturnSeries(self.values[start:stop], dates)

    def scaled(self, factor: float) -> ReturnSeries:
        """Series multiplied by ``factor``."""
        return ReturnSeries(self.values * factor, self.dates)


@dataclass(frozen=True, eq=False)
class SigmaPath:
    """Filtered volatilities sigma_1..sigma_{n+1}."""

    sigmas: FloatArray
    levels: FloatArray
    init_value: float
    rule: PresampleRule | None

    @property
    def sigma_next(self) -> float:
        """One-step-ahead volatility sigma_{n+1}."""
        return float(self.sigmas[-1])

    @property
    def in_sample(self) -> FloatArray:
        """sigma_1..sigma_n."""
        return self.sigmas[:-1]


class SimulatedPath(NamedTuple):
    """Simulated returns with the true volatility path."""

    series: ReturnSeries
    sigma_next: float
    true_sigmas: FloatArray


def _to_sigma(levels: FloatArray, power: int) -> FloatArray:
    levels = np.maximum(levels, 0.0)
    sigmas = np.sqrt(levels) if power == 2 else levels
    return np.maximum(sigmas, SIGMA_FLOOR)


def simulate_recursion(
    spec: ModelSpec,
    innovations: Iterable[float],
    start_level: float,
) -> tuple[FloatArray, FloatArray]:
    """Run the exact recursion eps_t = sigma_t * eta_t.

    Returns the returns (m,) and volatilities (m + 1,), the last one being
    the volatility after the final return.
    """
    etas = [float(eta) for eta in innovations]
    root = math.sqrt if spec.power == 2 else float
    eps = np.empty(len(etas))
    sigmas = np.empty(len(etas) + 1)
    level = float(start_level)
    for t, eta in enumerate(etas):
        sigma = max(root(max(level, 0.0)), SIGMA_FLOOR)
        sigmas[t] = sigma
        eps[t] = sigma * eta
        level = spec.step(level, eps[t])
    sigmas[-1] = max(root(max(level, 0.0)), SIGMA_FLOOR)
    return eps, sigmas


def simulate_path(
    spec: ModelSpec,
    dist: InnovationDist,
    n: int,
    burn_in: int = 1000,
    seed: int = 0,
) -> SimulatedPath:
    """Simulate n returns after discarding ``burn_in`` starting values."""
    if n < 1 or burn_in < 0:
        msg = f"Need n >= 1 and burn_in >= 0, got n={n}, burn_in={burn_in}."
        raise ParameterDomainError(msg)
    rng = make_rng(seed)
    innovations = dist.draw(rng, burn_in + n)
    eps, sigmas = simulate_recursion(spec, innovations, spec.start_level())
    true_sigmas = sigmas[burn_in:]
    return SimulatedPath(
        series=ReturnSeries(eps[burn_in:]),
        sigma_next=float(true_sigmas[-1]),
        true_sigmas=true_sigmas,
    )


def filter_sigma(
    spec: ModelSpec,
    series: ReturnSeries,
    *,
    init_value: float | None = None,
    presample: PresampleRule = PresampleRule.stationary,
) -> SigmaPath:
    """Truncated volatility filter sigma~_1(theta)..sigma~_{n+1}(theta).

    Args:
        spec (ModelSpec): parameters.
        series (ReturnSeries): returns eps_1..eps_n.
        init_value (float | None): sigma~_1 on the volatility scale.
            Defaults to the presample rule.
        presample (PresampleRule): initialization when ``init_value`` is None.

    Returns:
        SigmaPath

    """
    eps = series.values
    if init_value is None:
        level_1 = spec.presample_level(eps, presample)
        rule: PresampleRule | None = presample
    else:
        if init_value <= 0:
            msg = "Initial volatility must be positive."
            raise ParameterDomainError(msg)
        level_1 = float(init_value) ** spec.power
        rule = None
    beta = spec.beta
    tail, _ = lfilter([1.0], [1.0, -beta], spec.drive(eps), zi=[beta * level_1])
    levels = np.concatenate(([level_1], tail))
    sigmas = _to_sigma(levels, spec.power)
    return SigmaPath(
        sigmas=sigmas,
        levels=levels,
        init_value=float(sigmas[0]),
        rule=rule,
    )


def sigma_gradient(
    spec: ModelSpec,
    series: ReturnSeries,
    path: SigmaPath,
) -> FloatArray:
    """Analytic d sigma~_t / d theta for t = 1..n+1, shape (n + 1, r)."""
    eps = series.values
    inputs = np.column_stack((spec.drive_jacobian(eps), path.levels[:-1]))
    if path.rule is None:
        start = np.zeros(spec.r)
    else:
        start = spec.presample_gradient(eps, path.rule, float(path.levels[0]))
    beta = spec.beta
    tail, _ = lfilter(
        [1.0],
        [1.0, -beta],
        inputs,
        axis=0,
        zi=(beta * start)[np.newaxis, :],
    )
    grads = np.vstack((start, tail))
    if spec.power == 2:
        grads = grads / (2.0 * path.sigmas[:, np.newaxis])
    return grads
