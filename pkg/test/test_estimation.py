"""Module contain tests for the two-step estimator."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from varboot import PRESETS
from varboot import RESIDUAL_SCALE_TOLERANCE
from varboot import BoxTransform
from varboot import FitConfig
from varboot import FitResult
from varboot import Garch11
from varboot import ModelFamily
from varboot import NormalizedStudentT
from varboot import ParameterDomainError
from varboot import PresampleRule
from varboot import ReturnSeries
from varboot import SampleSizeError
from varboot import SigmaPath
from varboot import StandardNormal
from varboot import TGarch11
from varboot import derive_seed
from varboot import empirical_quantile
from varboot import estimate_theta
from varboot import fit_two_step
from varboot import make_rng
from varboot import qml_objective
from varboot import quantile_index
from varboot import simulate_path
from varboot import var_point_estimate


class TestObjective:
    """Test Gaussian quasi log-likelihood."""

    def test_single_observation(self) -> None:
        spec = Garch11(0.1, 0.1, 0.8)
        assert qml_objective(spec, ReturnSeries([1.0])) == pytest.approx(-0.5)
        assert qml_objective(spec, ReturnSeries([2.0])) == pytest.approx(-1.193147, abs=1e-6)

    @pytest.mark.parametrize("rule", list(PresampleRule))
    @pytest.mark.parametrize("scale", [0.5, 3.0])
    def test_scale_equivariance(self, rule: PresampleRule, scale: float) -> None:
        series = ReturnSeries(make_rng(2).standard_normal(300))
        for spec in (Garch11(0.2, 0.1, 0.8), TGarch11(0.1, 0.05, 0.15, 0.7)):
            base = qml_objective(spec, series, presample=rule)
            moved = qml_objective(
                spec.rescaled(scale),
                series.scaled(scale),
                presample=rule,
            )
            assert moved - base == pytest.approx(-math.log(scale), abs=1e-10)


class TestQuantile:
    """Test empirical quantile."""

    values = [-2.0, -1.0, 0.5, 1.0]

    def test_examples(self) -> None:
        assert empirical_quantile(self.values, 0.25) == -2.0
        assert empirical_quantile(self.values[::-1], 0.5) == -1.0

    def test_index(self) -> None:
        assert quantile_index(4, 0.25) == 1
        assert quantile_index(100, 0.05) == 5
        assert quantile_index(500, 0.01) == 5
        assert quantile_index(10, 0.001) == 1
        assert quantile_index(3, 0.999) == 3

    def test_errors(self) -> None:
        with pytest.raises(ParameterDomainError):
            empirical_quantile([], 0.1)
        with pytest.raises(ParameterDomainError):
            empirical_quantile(self.values, 1.0)

    def test_monotone(self) -> None:
        draws = make_rng(8).standard_normal(333)
        quantiles = [empirical_quantile(draws, a) for a in np.linspace(0.01, 0.99, 50)]
        assert np.all(np.diff(quantiles) >= 0)

    def test_normal_quantile(self) -> None:
        draws = make_rng(1).standard_normal(1_000_000)
        assert empirical_quantile(draws, 0.05) == pytest.approx(-1.6449, abs=0.01)


class TestBoxTransform:
    """Test free coordinates of the parameter box."""

    def test_round_trip(self) -> None:
        transform = BoxTransform(((1e-10, math.inf), (0.0, math.inf), (0.0, 0.999)))
        x = np.array([0.3, 0.12, 0.85])
        assert np.allclose(transform.to_box(transform.to_free(x)), x, rtol=1e-9)

    def test_boundary(self) -> None:
        transform = BoxTransform(((1e-10, math.inf), (0.0, math.inf), (0.0, 0.999)))
        assert transform.boundary_contact(np.array([0.3, 0.0, 0.5])) == (False, True, False)
        assert transform.boundary_contact(np.array([0.3, 0.1, 0.999])) == (False, False, True)


class TestFitConfig:
    """Test optimizer settings checks."""

    def test_defaults(self) -> None:
        bounds = FitConfig().bounds_for(ModelFamily.tgarch)
        assert len(bounds) == 4
        assert bounds[-1] == (0.0, 0.999)

    @pytest.mark.parametrize(
        "bounds",
        [
            ((0.0, 1.0), (0.0, 1.0), (0.0, 0.9)),
            ((0.1, 1.0), (0.0, 1.0), (0.0, 1.0)),
            ((0.1, 1.0), (0.5, 0.5), (0.0, 0.9)),
            ((0.1, 1.0), (0.0, 0.9)),
        ],
    )
    def test_bad_bounds(self, bounds: tuple[tuple[float, float], ...]) -> None:
        with pytest.raises(ParameterDomainError):
            FitConfig(param_bounds=bounds).bounds_for(ModelFamily.garch)

    def test_bad_settings(self) -> None:
        with pytest.raises(ParameterDomainError):
            FitConfig(tolerance=0.0)
        with pytest.raises(ParameterDomainError):
            FitConfig(restarts=0)


class TestFit:
    """Test the two-step fit."""

    def test_too_short(self) -> None:
        with pytest.raises(SampleSizeError):
            estimate_theta(ReturnSeries([0.1, -0.2] * 5), ModelFamily.garch)

    def test_first_order_condition(self, garch_fit: FitResult) -> None:
        assert garch_fit.converged
        assert np.linalg.norm(garch_fit.score()) < 1e-3

    def test_shapes(self, garch_fit: FitResult) -> None:
        assert garch_fit.residuals.shape == (500,)
        assert garch_fit.d_hats.shape == (501, 3)
        assert garch_fit.xi_hat == empirical_quantile(garch_fit.residuals, 0.05)
        assert garch_fit.to_dict()["var_hat"] > 0

    def test_residual_scale_identity(self, garch_fit: FitResult) -> None:
        assert garch_fit.presample is PresampleRule.stationary
        assert garch_fit.converged
        assert garch_fit.mean_square_residual == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("dist", [StandardNormal(), NormalizedStudentT(6)])
    def test_default_fits_keep_residual_scale(
        self,
        dist: StandardNormal | NormalizedStudentT,
    ) -> None:
        for sim in range(4):
            seed = derive_seed(17, sim)
            path = simulate_path(PRESETS["garch-high"], dist, 1000, seed=seed)
            fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
            if fit.diagnostics.optimizer_converged and fit.diagnostics.interior:
                assert fit.converged
                assert abs(fit.mean_square_residual - 1.0) < RESIDUAL_SCALE_TOLERANCE

    def test_sample_moment_rule_flags_scale(self) -> None:
        config = FitConfig(presample=PresampleRule.sample_moment)
        for sim in range(4):
            seed = derive_seed(19, sim)
            path = simulate_path(PRESETS["garch-high"], StandardNormal(), 1000, seed=seed)
            fit = fit_two_step(path.series, ModelFamily.garch, 0.05, config)
            off_scale = abs(fit.mean_square_residual - 1.0) >= RESIDUAL_SCALE_TOLERANCE
            if off_scale:
                assert not fit.converged
            if fit.converged:
                assert not off_scale

    def test_point_estimate(self, garch_fit: FitResult) -> None:
        path = SigmaPath(np.array([1.0, 2.0]), np.array([1.0, 4.0]), 1.0, None)
        fit = dataclasses.replace(garch_fit, xi_hat=-1.6449, sigma_path=path)
        assert var_point_estimate(fit).value == pytest.approx(3.2898)
        path = SigmaPath(np.array([1.0, 0.5]), np.array([1.0, 0.25]), 1.0, None)
        fit = dataclasses.replace(garch_fit, xi_hat=-2.0, sigma_path=path)
        assert var_point_estimate(fit).value == pytest.approx(1.0)

    def test_constant_series(self) -> None:
        fit = fit_two_step(ReturnSeries([0.5] * 200), ModelFamily.garch, 0.05)
        assert isinstance(fit.theta_hat, Garch11)
        assert np.allclose(fit.sigma_path.in_sample, 0.5, rtol=0.01)
        assert fit.mean_square_residual == pytest.approx(1.0, abs=0.02)

    def test_scale_property(self) -> None:
        path = simulate_path(Garch11(0.1587, 0.15, 0.8), StandardNormal(), 2000, seed=21)
        base = fit_two_step(path.series, ModelFamily.garch, 0.05)
        scaled = fit_two_step(path.series.scaled(10.0), ModelFamily.garch, 0.05)
        assert np.allclose(
            scaled.theta_hat.params,
            base.theta_hat.rescaled(10.0).params,
            rtol=1e-3,
        )
        assert var_point_estimate(scaled).value == pytest.approx(
            10.0 * var_point_estimate(base).value,
            rel=1e-3,
        )

    @pytest.mark.slow
    def test_consistency(self) -> None:
        truth = Garch11(0.1587, 0.15, 0.8)
        path = simulate_path(truth, StandardNormal(), 10_000, seed=3)
        fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
        assert np.allclose(fit.theta_hat.params, truth.params, atol=0.05)
        assert fit.xi_hat == pytest.approx(-1.6449, abs=0.05)
