"""Module contains the joint asymptotic covariance of (theta^, xi^)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import stats
from scipy.linalg import LinAlgError
from scipy.linalg import cho_factor
from scipy.linalg import cho_solve

from ._typing import FloatArray
from .estimation import FitResult
from .estimation import empirical_quantile
from .estimation import var_point_estimate
from .exceptions import ConditioningError
from .exceptions import ParameterDomainError
from .exceptions import SingularDensityError
from .interval import Interval
from .interval import check_gamma
from .volatility import InnovationDist


__all__ = (
    "MAX_CONDITION",
    "SigmaAlphaComponents",
    "SigmaAlphaMatrix",
    "uniform_kde",
    "default_bandwidth",
    "plug_in_components",
    "population_components",
    "sigma_alpha_matrix",
    "delta_method_interval",
    "asymptotic_interval",
)


MAX_CONDITION = 1e12
BANDWIDTH_CONSTANT = 1.06


@dataclass(frozen=True, eq=False)
class SigmaAlphaComponents:
    """Ingredients of Sigma_alpha.

    ``omega_vec`` and ``j_mat`` are only known for plug-in estimates; the
    population variant leaves them unset.
    """

    alpha: float
    kappa: float
    xi: float
    f_xi: float
    p_alpha: float
    omega_vec: FloatArray | None = None
    j_mat: FloatArray | None = None

    def __post_init__(self) -> None:
        """Check density and matrix shapes."""
        if not 0 < self.alpha < 1:
            msg = f"alpha must lie in (0, 1), got {self.alpha}."
            raise ParameterDomainError(msg)
        if not self.f_xi > 0:
            msg = "Density at the quantile is zero; use a larger bandwidth."
            raise SingularDensityError(msg)
        if (self.omega_vec is None) != (self.j_mat is None):
            msg = "omega_vec and j_mat must be given together."
            raise ParameterDomainError(msg)
        if self.j_mat is not None and self.omega_vec is not None:
            r = self.omega_vec.size
            if self.j_mat.shape != (r, r):
                msg = f"j_mat must be {r}x{r}, got {self.j_mat.shape}."
                raise ParameterDomainError(msg)

    @property
    def lambda_alpha(self) -> float:
        """Lambda_alpha: the xi-theta cross weight."""
        return (
            self.xi * (self.kappa - 1.0) / 4.0
            + self.p_alpha / (2.0 * self.f_xi)
        )

    @property
    def zeta_alpha(self) -> float:
        """Asymptotic variance of the quantile estimator."""
        f = self.f_xi
        return (
            self.xi**2 * (self.kappa - 1.0) / 4.0
            + self.xi * self.p_alpha / f
            + self.alpha * (1.0 - self.alpha) / f**2
        )

    @property
    def r(self) -> int:
        """Parameter count."""
        return 0 if self.omega_vec is None else int(self.omega_vec.size)

    def omega_quadratic(self) -> float:
        """Omega' J^-1 Omega, equal to one in the population."""
        if self.omega_vec is None or self.j_mat is None:
            msg = "Population components carry no Omega and J."
            raise ParameterDomainError(msg)
        return float(self.omega_vec @ np.linalg.solve(self.j_mat, self.omega_vec))

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        data: dict[str, Any] = {
            "alpha": self.alpha,
            "kappa": self.kappa,
            "xi": self.xi,
            "f_xi": self.f_xi,
            "p_alpha": self.p_alpha,
            "lambda_alpha": self.lambda_alpha,
            "zeta_alpha": self.zeta_alpha,
        }
        if self.omega_vec is not None and self.j_mat is not None:
            data["omega_vec"] = self.omega_vec.tolist()
            data["j_mat"] = self.j_mat.tolist()
        return data


@dataclass(frozen=True, eq=False)
class SigmaAlphaMatrix:
    """Block matrix Sigma_alpha of order r + 1."""

    mat: FloatArray

    @property
    def r(self) -> int:
        """Parameter count."""
        return int(self.mat.shape[0]) - 1

    @property
    def theta_block(self) -> FloatArray:
        """((kappa - 1) / 4) J^-1."""
        return self.mat[:-1, :-1]

    @property
    def cross(self) -> FloatArray:
        """Theta/xi covariance column."""
        return self.mat[:-1, -1]

    @property
    def corner(self) -> float:
        """Variance of the quantile block."""
        return float(self.mat[-1, -1])

    def quadratic(self, vector: FloatArray) -> float:
        """Quadratic form ``vector' M vector``."""
        return float(vector @ self.mat @ vector)


def uniform_kde(residuals: FloatArray, x: float, bandwidth: float) -> float:
    """Uniform-kernel density estimate (1/nh) sum 1/2 * 1{|x - eta_t| <= h}."""
    if bandwidth <= 0:
        msg = "Bandwidth must be positive."
        raise ParameterDomainError(msg)
    values = np.asarray(residuals, dtype=float)
    inside = np.abs(x - values) / bandwidth <= 1.0
    return float(0.5 * np.count_nonzero(inside) / (values.size * bandwidth))


def default_bandwidth(residuals: FloatArray, exponent: float = 0.2) -> float:
    """h_n = 1.06 * sd(eta) * n**-exponent."""
    if not 0 < exponent <= 0.5:
        msg = f"Bandwidth exponent must lie in (0, 0.5], got {exponent}."
        raise ParameterDomainError(msg)
    values = np.asarray(residuals, dtype=float)
    return BANDWIDTH_CONSTANT * float(np.std(values)) * values.size ** -exponent


def plug_in_components(
    fit: FitResult,
    alpha: float | None = None,
    bandwidth_exponent: float = 0.2,
    bandwidth: float | None = None,
) -> SigmaAlphaComponents:
    """Sample counterparts of kappa, Omega, J, p_alpha and f(xi_alpha).

    Args:
        fit (FitResult): two-step fit.
        alpha (float | None): VaR level, defaults to the level of ``fit``.
        bandwidth_exponent (float): rate of the default bandwidth.
        bandwidth (float | None): fixed bandwidth overriding the default.

    Returns:
        SigmaAlphaComponents

    """
    if not fit.converged:
        logging.warning("Plug-in components computed on a non-converged fit.")
    alpha = fit.alpha if alpha is None else alpha
    eta = fit.residuals
    xi = fit.xi_hat if alpha == fit.alpha else empirical_quantile(eta, alpha)
    d = fit.d_hats[:-1]
    n = eta.size
    eta_sq = eta * eta
    h = default_bandwidth(eta, bandwidth_exponent) if bandwidth is None else bandwidth
    f_xi = uniform_kde(eta, xi, h)
    if f_xi <= 0:
        msg = f"No residuals within bandwidth {h:.4g} of {xi:.4f}; use a larger bandwidth."
        raise SingularDensityError(msg)
    return SigmaAlphaComponents(
        alpha=alpha,
        kappa=float(np.mean(eta_sq * eta_sq)),
        xi=xi,
        f_xi=f_xi,
        p_alpha=float(np.mean(eta_sq * (eta < xi))) - alpha,
        omega_vec=d.mean(axis=0),
        j_mat=d.T @ d / n,
    )


def population_components(dist: InnovationDist, alpha: float) -> SigmaAlphaComponents:
    """Exact components for a known innovation law."""
    if not 0 < alpha < 1:
        msg = f"alpha must lie in (0, 1), got {alpha}."
        raise ParameterDomainError(msg)
    xi = dist.ppf(alpha)
    return SigmaAlphaComponents(
        alpha=alpha,
        kappa=dist.kurtosis,
        xi=xi,
        f_xi=dist.pdf(xi),
        p_alpha=dist.partial_second_moment(xi) - alpha,
    )


def sigma_alpha_matrix(components: SigmaAlphaComponents) -> SigmaAlphaMatrix:
    """Assemble Sigma_alpha from its components."""
    omega = components.omega_vec
    j_mat = components.j_mat
    if omega is None or j_mat is None:
        msg = "Sigma_alpha needs Omega and J."
        raise ParameterDomainError(msg)
    condition = float(np.linalg.cond(j_mat))
    if not math.isfinite(condition) or condition >= MAX_CONDITION:
        msg = f"J is ill-conditioned (condition number {condition:.3g})."
        raise ConditioningError(msg, condition)
    try:
        factor = cho_factor(j_mat)
    except LinAlgError as error:
        msg = "J is not positive definite."
        raise ConditioningError(msg, condition) from error
    r = omega.size
    j_inv = cho_solve(factor, np.eye(r))
    cross = components.lambda_alpha * cho_solve(factor, omega)
    mat = np.empty((r + 1, r + 1))
    mat[:r, :r] = (components.kappa - 1.0) / 4.0 * j_inv
    mat[:r, r] = cross
    mat[r, :r] = cross
    mat[r, r] = components.zeta_alpha
    return SigmaAlphaMatrix(0.5 * (mat + mat.T))


def delta_method_interval(
    var_hat: float,
    xi_hat: float,
    sigma_next: float,
    sigma_next_grad: FloatArray,
    matrix: SigmaAlphaMatrix,
    n: int,
    gamma: float,
) -> Interval:
    """VaR^ -/+ z_{1-gamma/2} / sqrt(n) * sqrt(v' Sigma v)."""
    check_gamma(gamma)
    vector = np.append(-xi_hat * np.asarray(sigma_next_grad, dtype=float), sigma_next)
    form = matrix.quadratic(vector)
    flagged = form < 0
    if flagged:
        logging.warning("Negative delta-method variance %.3g clamped to zero.", form)
        form = 0.0
    half = stats.norm.ppf(1.0 - gamma / 2.0) * math.sqrt(form / n)
    return Interval(var_hat - half, var_hat + half, flagged=flagged)


def asymptotic_interval(
    fit: FitResult,
    comps: SigmaAlphaComponents,
    gamma: float,
) -> Interval:
    """Asymptotic normal confidence interval for the conditional VaR."""
    estimate = var_point_estimate(fit)
    grad_next = estimate.sigma_next * fit.d_hats[-1]
    return delta_method_interval(
        var_hat=estimate.value,
        xi_hat=fit.xi_hat,
        sigma_next=estimate.sigma_next,
        sigma_next_grad=grad_next,
        matrix=sigma_alpha_matrix(comps),
        n=fit.n,
        gamma=gamma,
    )
