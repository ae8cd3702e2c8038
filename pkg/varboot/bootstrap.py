"""Module contains fixed- and recursive-design residual bootstraps."""
from __future__ import annotations

import logging
import math
from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from dataclasses import field
from functools import partial
from typing import Any
from typing import ClassVar
from typing import NamedTuple

import numpy as np

from ._typing import FloatArray
from .enumcls import Design
from .enumcls import EstimatorMode
from .enumcls import IntervalKind
from .estimation import FitConfig
from .estimation import FitResult
from .estimation import QmlProblem
from .estimation import empirical_quantile
from .estimation import moment_start
from .estimation import quantile_index
from .exceptions import AllReplicatesFailedError
from .exceptions import NumericalError
from .exceptions import ParameterDomainError
from .exceptions import SampleSizeError
from .exceptions import VarBootError
from .interval import Interval
from .interval import check_gamma
from .parallel import map_ordered
from .seeding import make_rng
from .volatility import ModelSpec
from .volatility import ReturnSeries
from .volatility import filter_sigma
from .volatility import sigma_gradient
from .volatility import simulate_recursion


__all__ = (
    "MIN_INTERVAL_REPLICATES",
    "BootstrapConfig",
    "Replicate",
    "ResidualBootstrap",
    "FixedDesign",
    "RecursiveDesign",
    "fixed_design_replicate",
    "recursive_design_replicate",
    "BootstrapOutcome",
    "run_bootstrap",
    "IntervalSet",
    "build_intervals",
)


MIN_INTERVAL_REPLICATES = 50
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap settings."""

    design: Design = Design.fixed
    estimator_mode: EstimatorMode = EstimatorMode.full_qmle
    b_replicates: int = 499
    base_seed: int = 0
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self) -> None:
        """Normalize tags and check replicate count."""
        object.__setattr__(self, "design", Design(self.design))
        object.__setattr__(self, "estimator_mode", EstimatorMode(self.estimator_mode))
        if self.b_replicates < 1:
            msg = f"b_replicates must be at least 1, got {self.b_replicates}."
            raise ParameterDomainError(msg)
        if self.base_seed < 0:
            msg = "base_seed must be non-negative."
            raise ParameterDomainError(msg)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "design": self.design.value,
            "estimator_mode": self.estimator_mode.value,
            "b_replicates": self.b_replicates,
            "base_seed": self.base_seed,
            "fit_config": self.fit_config.to_dict(),
        }


class Replicate(NamedTuple):
    """One bootstrap draw."""

    theta: FloatArray
    xi: float
    var: float
    innovation_mean_square: float


class ResidualBootstrap(ABC):
    """Base residual bootstrap.

    Subclasses decide how the bootstrap returns and the history used for
    volatility filtering are generated; estimation and the VaR step are
    shared.
    """

    __slots__ = ("fit", "series", "alpha", "mode", "fit_config", "_j_inv", "_bounds")

    design: ClassVar[Design]

    def __init__(
        self,
        fit: FitResult,
        series: ReturnSeries,
        alpha: float,
        mode: EstimatorMode = EstimatorMode.full_qmle,
        fit_config: FitConfig | None = None,
    ) -> None:
        """Initialize."""
        if series.n != fit.n:
            msg = "Series and fit have different lengths."
            raise ParameterDomainError(msg)
        if not 0 < alpha < 1:
            msg = f"alpha must lie in (0, 1), got {alpha}."
            raise ParameterDomainError(msg)
        self.fit = fit
        self.series = series
        self.alpha = alpha
        self.mode = EstimatorMode(mode)
        self.fit_config = fit_config or FitConfig(presample=fit.presample)
        self._bounds = np.array(self.fit_config.bounds_for(fit.family))
        self._j_inv: FloatArray | None = None

    @abstractmethod
    def generate(self, innovations: FloatArray) -> tuple[FloatArray, ReturnSeries]:
        """Bootstrap returns and the history their volatility is filtered from."""
        ...

    def draw_innovations(self, rng: np.random.Generator) -> FloatArray:
        """Resample raw residuals uniformly with replacement."""
        residuals = self.fit.residuals
        return residuals[rng.integers(0, residuals.size, residuals.size)]

    @property
    def j_inverse(self) -> FloatArray:
        """Inverse of the gradient outer-product matrix, cached."""
        if self._j_inv is None:
            d = self.fit.d_hats[:-1]
            self._j_inv = np.linalg.inv(d.T @ d / d.shape[0])
        return self._j_inv

    def newton_step(self, targets: FloatArray, history: ReturnSeries) -> ModelSpec:
        """One Newton-Raphson step from theta^ on the bootstrap criterion."""
        theta = self.fit.theta_hat
        path = filter_sigma(theta, history, presample=self.fit_config.presample)
        d = (sigma_gradient(theta, history, path) / path.sigmas[:, np.newaxis])[:-1]
        ratio = targets / path.in_sample
        score = np.mean(d * (ratio * ratio - 1.0)[:, np.newaxis], axis=0)
        step = theta.params + 0.5 * self.j_inverse @ score
        clipped = np.clip(step, self._bounds[:, 0], self._bounds[:, 1])
        return type(theta).from_params(clipped)

    def full_qmle(self, targets: FloatArray, history: ReturnSeries) -> ModelSpec:
        """Warm start at theta^, falling back to the multistart search."""
        problem = QmlProblem(self.fit.family, targets, history, self.fit_config)
        spec, diagnostics = problem(self.fit.theta_hat, restarts=1)
        if diagnostics.optimizer_converged:
            return spec
        logging.debug("Warm-started bootstrap QMLE failed, running multistart.")
        spec, diagnostics = problem(moment_start(history, self.fit.family))
        if not diagnostics.optimizer_converged:
            msg = "Bootstrap QMLE did not converge."
            raise NumericalError(msg)
        return spec

    def __call__(self, rng: np.random.Generator) -> Replicate:
        """Run one replicate."""
        innovations = self.draw_innovations(rng)
        targets, history = self.generate(innovations)
        if self.mode is EstimatorMode.newton_raphson:
            theta_star = self.newton_step(targets, history)
        else:
            theta_star = self.full_qmle(targets, history)
        presample = self.fit_config.presample
        sigmas = filter_sigma(theta_star, history, presample=presample).in_sample
        xi_star = empirical_quantile(targets / sigmas, self.alpha)
        sigma_next = filter_sigma(theta_star, self.series, presample=presample).sigma_next
        return Replicate(
            theta=theta_star.params,
            xi=xi_star,
            var=-xi_star * sigma_next,
            innovation_mean_square=float(np.mean(innovations * innovations)),
        )


class FixedDesign(ResidualBootstrap):
    """eps*_t = sigma~_t(theta^) * eta*_t on the original volatility path."""

    __slots__ = ()

    design = Design.fixed

    def generate(self, innovations: FloatArray) -> tuple[FloatArray, ReturnSeries]:
        """Scale residuals by the estimated volatility path."""
        return self.fit.sigma_path.in_sample * innovations, self.series


class RecursiveDesign(ResidualBootstrap):
    """eps*_t generated through the volatility recursion at theta^."""

    __slots__ = ()

    design = Design.recursive

    def generate(self, innovations: FloatArray) -> tuple[FloatArray, ReturnSeries]:
        """Rebuild returns through the fitted recursion."""
        start_level = float(self.fit.sigma_path.levels[0])
        eps_star, _ = simulate_recursion(self.fit.theta_hat, innovations, start_level)
        return eps_star, ReturnSeries(eps_star)


_DESIGNS: dict[Design, type[ResidualBootstrap]] = {
    Design.fixed: FixedDesign,
    Design.recursive: RecursiveDesign,
}


def fixed_design_replicate(
    fit: FitResult,
    series: ReturnSeries,
    alpha: float,
    seed: int,
    mode: EstimatorMode = EstimatorMode.full_qmle,
) -> Replicate:
    """Single fixed-design replicate drawn from ``seed``."""
    return FixedDesign(fit, series, alpha, mode)(make_rng(seed))


def recursive_design_replicate(
    fit: FitResult,
    series: ReturnSeries,
    alpha: float,
    seed: int,
    mode: EstimatorMode = EstimatorMode.full_qmle,
) -> Replicate:
    """Single recursive-design replicate drawn from ``seed``."""
    return RecursiveDesign(fit, series, alpha, mode)(make_rng(seed))


@dataclass(frozen=True, eq=False)
class BootstrapOutcome:
    """Surviving replicates and the original-sample centering."""

    var_stars: FloatArray
    theta_stars: FloatArray
    xi_stars: FloatArray
    n: int
    var_hat: float
    failed_count: int = 0
    theta_hat: FloatArray | None = None
    xi_hat: float | None = None
    innovation_mean_squares: FloatArray | None = None
    design: Design = Design.fixed

    @property
    def b_replicates(self) -> int:
        """Replicates requested, failed ones included."""
        return int(self.var_stars.size) + self.failed_count

    def var_deviations(self) -> FloatArray:
        """sqrt(n) * (VaR* - VaR^)."""
        return math.sqrt(self.n) * (self.var_stars - self.var_hat)

    def theta_deviations(self) -> FloatArray:
        """sqrt(n) * (theta* - theta^), one row per replicate."""
        if self.theta_hat is None:
            msg = "Outcome carries no theta^."
            raise ParameterDomainError(msg)
        return math.sqrt(self.n) * (self.theta_stars - self.theta_hat)

    def xi_deviations(self) -> FloatArray:
        """sqrt(n) * (xi^ - xi*)."""
        if self.xi_hat is None:
            msg = "Outcome carries no xi^."
            raise ParameterDomainError(msg)
        return math.sqrt(self.n) * (self.xi_hat - self.xi_stars)

    def standard_errors(self) -> FloatArray:
        """Replicate standard deviation of every parameter."""
        return np.std(self.theta_stars, axis=0, ddof=1)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "design": self.design.value,
            "b_replicates": self.b_replicates,
            "failed_count": self.failed_count,
            "n": self.n,
            "var_hat": self.var_hat,
            "standard_errors": (
                self.standard_errors().tolist()
                if self.var_stars.size > 1 else None
            ),
        }


def _safe_replicate(
    runner: ResidualBootstrap,
    base_seed: int,
    index: int,
) -> Replicate | None:
    """Run one replicate, None when its fit fails."""
    try:
        return runner(make_rng(base_seed, index))
    except VarBootError as error:
        logging.warning("Bootstrap replicate %s failed: %s", index, error)
        return None


def run_bootstrap(
    fit: FitResult,
    series: ReturnSeries,
    alpha: float,
    config: BootstrapConfig,
    threads: int | None = 1,
) -> BootstrapOutcome:
    """Run B replicates keyed by (base_seed, replicate index).

    Args:
        fit (FitResult): two-step fit of ``series``.
        series (ReturnSeries): original returns.
        alpha (float): VaR level.
        config (BootstrapConfig): design, estimator and replicate count.
        threads (int | None): worker processes, None for the default count.

    Returns:
        BootstrapOutcome

    """
    fit_config = config.fit_config.replace(presample=fit.presample)
    runner = _DESIGNS[config.design](
        fit,
        series,
        alpha,
        config.estimator_mode,
        fit_config,
    )
    results = map_ordered(
        partial(_safe_replicate, runner, config.base_seed),
        range(config.b_replicates),
        threads,
    )
    survivors = [item for item in results if item is not None]
    failed = config.b_replicates - len(survivors)
    if not survivors:
        msg = f"All {config.b_replicates} bootstrap replicates failed."
        raise AllReplicatesFailedError(msg)
    if failed:
        logging.info("%s of %s bootstrap replicates failed.", failed, config.b_replicates)
    xi_hat = fit.xi_hat if alpha == fit.alpha else empirical_quantile(fit.residuals, alpha)
    return BootstrapOutcome(
        var_stars=np.array([item.var for item in survivors]),
        theta_stars=np.vstack([item.theta for item in survivors]),
        xi_stars=np.array([item.xi for item in survivors]),
        n=fit.n,
        var_hat=-xi_hat * fit.sigma_next,
        failed_count=failed,
        theta_hat=fit.theta_hat.params,
        xi_hat=xi_hat,
        innovation_mean_squares=np.array(
            [item.innovation_mean_square for item in survivors],
        ),
        design=config.design,
    )


@dataclass(frozen=True)
class IntervalSet:
    """Equal-tailed percentile, reversed-tails and symmetric intervals."""

    ep: Interval
    rt: Interval
    sy: Interval
    gamma: float
    var_hat: float

    def get(self, kind: IntervalKind | str) -> Interval:
        """Fetch interval by kind."""
        return getattr(self, IntervalKind(kind).value)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "gamma": self.gamma,
            "var_hat": self.var_hat,
            "ep": self.ep.to_dict(),
            "rt": self.rt.to_dict(),
            "sy": self.sy.to_dict(),
        }


def _order_statistic(sorted_values: FloatArray, q: float) -> float:
    return float(sorted_values[quantile_index(sorted_values.size, q) - 1])


def _same(left: float, right: float, scale: float) -> bool:
    return math.isclose(left, right, rel_tol=IDENTITY_RTOL, abs_tol=IDENTITY_RTOL * scale)


def build_intervals(outcome: BootstrapOutcome, gamma: float) -> IntervalSet:
    """EP, RT and SY intervals from the law of sqrt(n) * (VaR* - VaR^)."""
    check_gamma(gamma)
    count = outcome.var_stars.size
    if count < MIN_INTERVAL_REPLICATES:
        msg = f"Need at least {MIN_INTERVAL_REPLICATES} replicates, got {count}."
        raise SampleSizeError(msg)
    root_n = math.sqrt(outcome.n)
    var_hat = outcome.var_hat
    deviations = np.sort(outcome.var_deviations())
    lower = _order_statistic(deviations, gamma / 2.0)
    upper = _order_statistic(deviations, 1.0 - gamma / 2.0)
    radius = _order_statistic(np.sort(np.abs(deviations)), 1.0 - gamma)
    ep = Interval(var_hat - upper / root_n, var_hat - lower / root_n)
    rt = Interval(var_hat + lower / root_n, var_hat + upper / root_n)
    sy = Interval(var_hat - radius / root_n, var_hat + radius / root_n)

    raw = np.sort(outcome.var_stars)
    scale = max(1.0, float(np.max(np.abs(raw))), abs(var_hat))
    identities = (
        _same(ep.length, rt.length, scale),
        _same(rt.lo, _order_statistic(raw, gamma / 2.0), scale),
        _same(rt.hi, _order_statistic(raw, 1.0 - gamma / 2.0), scale),
        _same(sy.hi - var_hat, var_hat - sy.lo, scale),
    )
    if not all(identities):
        msg = f"Bootstrap interval identities violated: {identities}."
        raise NumericalError(msg)
    return IntervalSet(ep=ep, rt=rt, sy=sy, gamma=gamma, var_hat=var_hat)
