"""Module contains the two-step QML / empirical quantile estimator."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Any
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.special import logit

from ._typing import FloatArray
from .enumcls import ModelFamily
from .enumcls import PresampleRule
from .exceptions import ParameterDomainError
from .seeding import make_rng
from .volatility import ModelSpec
from .volatility import ReturnSeries
from .volatility import SigmaPath
from .volatility import filter_sigma
from .volatility import sigma_gradient
from .volatility import spec_type


__all__ = (
    "DEFAULT_BOUNDS",
    "RESIDUAL_SCALE_TOLERANCE",
    "FitConfig",
    "FitDiagnostics",
    "FitResult",
    "VarEstimate",
    "BoxTransform",
    "QmlProblem",
    "qml_objective",
    "bootstrap_objective",
    "moment_start",
    "estimate_theta",
    "quantile_index",
    "empirical_quantile",
    "assemble_fit",
    "fit_two_step",
    "var_point_estimate",
)


MIN_ESTIMATION_SIZE = 20
BOUNDARY_TOLERANCE = 1e-6
RESIDUAL_SCALE_TOLERANCE = 1e-3
_INF = math.inf

DEFAULT_BOUNDS: dict[ModelFamily, tuple[tuple[float, float], ...]] = {
    ModelFamily.garch: ((1e-10, _INF), (0.0, _INF), (0.0, 0.999)),
    ModelFamily.tgarch: ((1e-10, _INF), (0.0, _INF), (0.0, _INF), (0.0, 0.999)),
}


def _check_level(value: float, name: str) -> None:
    if not 0 < value < 1:
        msg = f"{name} must lie in (0, 1), got {value}."
        raise ParameterDomainError(msg)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings for the Gaussian QMLE."""

    max_iterations: int = 5000
    tolerance: float = 1e-9
    restarts: int = 3
    param_bounds: tuple[tuple[float, float], ...] | None = None
    presample: PresampleRule = PresampleRule.stationary
    seed: int = 0

    def __post_init__(self) -> None:
        """Check settings."""
        if self.tolerance <= 0:
            msg = "tolerance must be positive."
            raise ParameterDomainError(msg)
        if self.max_iterations < 1 or self.restarts < 1:
            msg = "max_iterations and restarts must be at least 1."
            raise ParameterDomainError(msg)
        object.__setattr__(self, "presample", PresampleRule(self.presample))
        if self.param_bounds is not None:
            bounds = tuple(
                (float(lo), float(hi))
                for lo, hi in self.param_bounds
            )
            object.__setattr__(self, "param_bounds", bounds)

    def bounds_for(self, family: ModelFamily) -> tuple[tuple[float, float], ...]:
        """Parameter box of ``family`` checked against the model invariants."""
        family = ModelFamily(family)
        bounds = self.param_bounds or DEFAULT_BOUNDS[family]
        names = spec_type(family).names
        if len(bounds) != len(names):
            msg = f"{family.value} needs {len(names)} bounds, got {len(bounds)}."
            raise ParameterDomainError(msg)
        for name, (lo, hi) in zip(names, bounds):
            if not lo < hi:
                msg = f"Bounds for {name} are empty: [{lo}, {hi}]."
                raise ParameterDomainError(msg)
            if name == "omega" and lo <= 0:
                msg = "Lower bound of omega must be positive."
                raise ParameterDomainError(msg)
            if lo < 0:
                msg = f"Lower bound of {name} must be non-negative."
                raise ParameterDomainError(msg)
            if name == "beta" and hi >= 1:
                msg = "Upper bound of beta must be below 1."
                raise ParameterDomainError(msg)
        return bounds

    def replace(self, **changes: Any) -> FitConfig:
        """Copy with changes."""
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
            "restarts": self.restarts,
            "param_bounds": (
                [list(pair) for pair in self.param_bounds]
                if self.param_bounds is not None else None
            ),
            "presample": self.presample.value,
            "seed": self.seed,
        }


class BoxTransform:
    """Map between a parameter box and unconstrained coordinates.

    Bounded parameters go through a scaled logit, half-bounded ones through
    a log shifted by ``SHIFT``.
    """

    __slots__ = ("lower", "upper", "bounded")

    SHIFT = 1e-8

    def __init__(self, bounds: Sequence[tuple[float, float]]) -> None:
        """Initialize."""
        self.lower = np.array([lo for lo, _ in bounds], dtype=float)
        self.upper = np.array([hi for _, hi in bounds], dtype=float)
        self.bounded = np.isfinite(self.upper)

    def to_free(self, x: FloatArray) -> FloatArray:
        """Map box coordinates to free ones."""
        x = np.asarray(x, dtype=float)
        free = np.empty_like(x)
        b = self.bounded
        width = self.upper[b] - self.lower[b]
        fraction = np.clip((x[b] - self.lower[b]) / width, 1e-9, 1 - 1e-9)
        free[b] = logit(fraction)
        free[~b] = np.log(np.maximum(x[~b] - self.lower[~b], 0.0) + self.SHIFT)
        return free

    def to_box(self, u: FloatArray) -> FloatArray:
        """Map free coordinates back into the box."""
        u = np.clip(np.asarray(u, dtype=float), -700.0, 700.0)
        x = np.empty_like(u)
        b = self.bounded
        x[b] = self.lower[b] + (self.upper[b] - self.lower[b]) * expit(u[b])
        x[~b] = self.lower[~b] + np.maximum(np.exp(u[~b]) - self.SHIFT, 0.0)
        return x

    def boundary_contact(self, x: FloatArray) -> tuple[bool, ...]:
        """Flag parameters sitting on (within tolerance of) a bound."""
        width = np.where(self.bounded, self.upper - self.lower, 1.0)
        scale = np.maximum(width, 1.0) * BOUNDARY_TOLERANCE
        low = x - self.lower < scale
        high = self.bounded & (self.upper - x < scale)
        return tuple(bool(flag) for flag in low | high)


@dataclass(frozen=True)
class FitDiagnostics:
    """Optimizer outcome."""

    iterations: int
    evaluations: int
    objective: float
    boundary: tuple[bool, ...]
    optimizer_converged: bool
    restarts_used: int

    @property
    def interior(self) -> bool:
        """True when no parameter touches a bound."""
        return not any(self.boundary)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "objective": self.objective,
            "boundary": list(self.boundary),
            "optimizer_converged": self.optimizer_converged,
            "restarts_used": self.restarts_used,
        }


def _gaussian_criterion(
    spec: ModelSpec,
    targets: FloatArray,
    history: ReturnSeries,
    presample: PresampleRule,
) -> float:
    sigmas = filter_sigma(spec, history, presample=presample).in_sample
    ratio = targets / sigmas
    return float(np.mean(-0.5 * ratio * ratio - np.log(sigmas)))


def qml_objective(
    spec: ModelSpec,
    series: ReturnSeries,
    *,
    presample: PresampleRule = PresampleRule.stationary,
) -> float:
    """Gaussian quasi log-likelihood (1/n) sum of l~_t(theta)."""
    return _gaussian_criterion(spec, series.values, series, presample)


def bootstrap_objective(
    spec: ModelSpec,
    targets: FloatArray,
    history: ReturnSeries,
    *,
    presample: PresampleRule = PresampleRule.stationary,
) -> float:
    """Criterion with volatilities filtered from ``history``."""
    return _gaussian_criterion(spec, np.asarray(targets), history, presample)


class QmlProblem:
    """Maximize the Gaussian criterion over the parameter box."""

    __slots__ = ("spec_cls", "targets", "history", "config", "transform")

    PENALTY = 1e10

    def __init__(
        self,
        family: ModelFamily,
        targets: FloatArray,
        history: ReturnSeries,
        config: FitConfig,
    ) -> None:
        """Initialize."""
        family = ModelFamily(family)
        self.spec_cls = spec_type(family)
        self.targets = np.asarray(targets, dtype=float)
        self.history = history
        self.config = config
        self.transform = BoxTransform(config.bounds_for(family))

    def _negative(self, free: FloatArray) -> float:
        try:
            spec = self.spec_cls.from_params(self.transform.to_box(free))
        except ParameterDomainError:
            return self.PENALTY
        value = _gaussian_criterion(
            spec,
            self.targets,
            self.history,
            self.config.presample,
        )
        return -value if math.isfinite(value) else self.PENALTY

    def __call__(
        self,
        start: ModelSpec,
        *,
        restarts: int | None = None,
    ) -> tuple[ModelSpec, FitDiagnostics]:
        """Nelder-Mead from ``start``, then perturbed restarts around the best."""
        config = self.config
        attempts = config.restarts if restarts is None else restarts
        rng = make_rng(config.seed)
        dim = start.r
        free = self.transform.to_free(start.params)
        best = None
        iterations = evaluations = 0
        for attempt in range(attempts):
            if best is not None:
                free = best.x + rng.normal(0.0, 0.5, dim)
            simplex = np.vstack((free, free + 0.25 * np.eye(dim)))
            result = minimize(
                self._negative,
                free,
                method="Nelder-Mead",
                options={
                    "maxiter": config.max_iterations,
                    "xatol": 1e-8,
                    "fatol": config.tolerance,
                    "initial_simplex": simplex,
                },
            )
            iterations += int(result.nit)
            evaluations += int(result.nfev)
            logging.debug(
                "QML attempt %s: objective %.10f, success %s",
                attempt,
                -result.fun,
                result.success,
            )
            if best is None or result.fun < best.fun:
                best = result
        assert best is not None
        x = self.transform.to_box(best.x)
        spec = self.spec_cls.from_params(x)
        diagnostics = FitDiagnostics(
            iterations=iterations,
            evaluations=evaluations,
            objective=-float(best.fun),
            boundary=self.transform.boundary_contact(x),
            optimizer_converged=bool(best.success),
            restarts_used=attempts,
        )
        return spec, diagnostics


def moment_start(series: ReturnSeries, family: ModelFamily) -> ModelSpec:
    """Moment-based starting point of the optimizer."""
    family = ModelFamily(family)
    eps = series.values
    if family is ModelFamily.garch:
        scale = float(np.var(eps)) or float(np.mean(np.square(eps)))
        values = [0.1 * scale, 0.1, 0.8]
    else:
        scale = float(np.mean(np.abs(eps)))
        values = [0.1 * scale, 0.05, 0.10, 0.8]
    values[0] = max(values[0], 1e-8)
    return spec_type(family).from_params(values)


def estimate_theta(
    series: ReturnSeries,
    family: ModelFamily,
    config: FitConfig | None = None,
) -> tuple[ModelSpec, FitDiagnostics]:
    """QMLE theta^_n = argmax L~_n(theta) over the parameter box."""
    config = config or FitConfig()
    series.require(MIN_ESTIMATION_SIZE)
    problem = QmlProblem(family, series.values, series, config)
    spec, diagnostics = problem(moment_start(series, family))
    if not diagnostics.optimizer_converged:
        logging.warning(
            "QMLE did not converge after %s restarts; returning best point.",
            diagnostics.restarts_used,
        )
    return spec, diagnostics


def quantile_index(n: int, q: float) -> int:
    """1-based order statistic index ceil(n * q) of the generalized inverse."""
    k = math.ceil(round(n * q, 9))
    return min(max(k, 1), n)


def empirical_quantile(residuals: Sequence[float] | FloatArray, alpha: float) -> float:
    """Generalized inverse of the empirical cdf at ``alpha``."""
    values = np.asarray(residuals, dtype=float).ravel()
    if values.size == 0:
        msg = "Residuals must not be empty."
        raise ParameterDomainError(msg)
    _check_level(alpha, "alpha")
    k = quantile_index(values.size, alpha)
    return float(np.partition(values, k - 1)[k - 1])


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of the two-step estimator."""

    family: ModelFamily
    theta_hat: ModelSpec
    residuals: FloatArray
    xi_hat: float
    sigma_path: SigmaPath
    d_hats: FloatArray
    loglik: float
    converged: bool
    alpha: float
    diagnostics: FitDiagnostics
    presample: PresampleRule = field(default=PresampleRule.stationary)

    @property
    def n(self) -> int:
        """Sample size."""
        return int(self.residuals.size)

    @property
    def sigma_next(self) -> float:
        """One-step-ahead volatility."""
        return self.sigma_path.sigma_next

    @property
    def mean_square_residual(self) -> float:
        """Mean of the squared residuals."""
        return float(np.mean(np.square(self.residuals)))

    def score(self) -> FloatArray:
        """(1/n) sum D^_t (eta^_t**2 - 1), zero at interior optima."""
        weights = np.square(self.residuals) - 1.0
        return np.mean(self.d_hats[:-1] * weights[:, np.newaxis], axis=0)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "theta_hat": self.theta_hat.to_dict(),
            "alpha": self.alpha,
            "xi_hat": self.xi_hat,
            "sigma_next": self.sigma_next,
            "var_hat": var_point_estimate(self).value,
            "loglik": self.loglik,
            "n": self.n,
            "converged": self.converged,
            "mean_square_residual": self.mean_square_residual,
            "presample": self.presample.value,
            "diagnostics": self.diagnostics.to_dict(),
        }


@dataclass(frozen=True)
class VarEstimate:
    """Conditional VaR point estimate -xi^ * sigma~_{n+1}(theta^)."""

    value: float
    alpha: float
    sigma_next: float
    xi_hat: float


def assemble_fit(
    series: ReturnSeries,
    theta: ModelSpec,
    alpha: float,
    diagnostics: FitDiagnostics,
    presample: PresampleRule = PresampleRule.stationary,
) -> FitResult:
    """Residuals, quantile and gradients at an estimated theta."""
    _check_level(alpha, "alpha")
    path = filter_sigma(theta, series, presample=presample)
    sigmas = path.in_sample
    residuals = series.values / sigmas
    xi_hat = empirical_quantile(residuals, alpha)
    d_hats = sigma_gradient(theta, series, path) / path.sigmas[:, np.newaxis]
    loglik = float(np.mean(-0.5 * residuals * residuals - np.log(sigmas)))
    if xi_hat >= 0 and alpha <= 0.1:
        logging.warning(
            "Non-negative residual quantile %.4f at alpha=%s.",
            xi_hat,
            alpha,
        )
    scale_gap = abs(float(np.mean(residuals * residuals)) - 1.0)
    scaled = scale_gap < RESIDUAL_SCALE_TOLERANCE
    if diagnostics.interior and not scaled:
        logging.info(
            "Mean squared residual is %.5f away from 1 (presample %s); fit not converged.",
            scale_gap,
            presample.value,
        )
    return FitResult(
        family=theta.family,
        theta_hat=theta,
        residuals=residuals,
        xi_hat=xi_hat,
        sigma_path=path,
        d_hats=d_hats,
        loglik=loglik,
        converged=diagnostics.optimizer_converged and diagnostics.interior and scaled,
        alpha=alpha,
        diagnostics=diagnostics,
        presample=presample,
    )


def fit_two_step(
    series: ReturnSeries,
    family: ModelFamily,
    alpha: float,
    config: FitConfig | None = None,
) -> FitResult:
    """QMLE of theta, then the empirical alpha-quantile of the residuals."""
    config = config or FitConfig()
    _check_level(alpha, "alpha")
    theta, diagnostics = estimate_theta(series, family, config)
    return assemble_fit(series, theta, alpha, diagnostics, config.presample)


def var_point_estimate(fit: FitResult) -> VarEstimate:
    """VaR^_{n,alpha} = -xi^ * sigma~_{n+1}(theta^)."""
    sigma_next = fit.sigma_next
    return VarEstimate(
        value=-fit.xi_hat * sigma_next,
        alpha=fit.alpha,
        sigma_next=sigma_next,
        xi_hat=fit.xi_hat,
    )
