"""Module contain tests for the residual bootstraps and their intervals."""
from __future__ import annotations

import numpy as np
import pytest
from numpy.typing import ArrayLike
from scipy import stats

from varboot import PRESETS
from varboot import bootstrap
from varboot import AllReplicatesFailedError
from varboot import BootstrapConfig
from varboot import BootstrapOutcome
from varboot import Design
from varboot import EstimatorMode
from varboot import FitResult
from varboot import FloatArray
from varboot import FixedDesign
from varboot import Garch11
from varboot import ModelFamily
from varboot import NumericalError
from varboot import ParameterDomainError
from varboot import Replicate
from varboot import ReturnSeries
from varboot import SampleSizeError
from varboot import StandardNormal
from varboot import build_intervals
from varboot import fit_two_step
from varboot import fixed_design_replicate
from varboot import make_rng
from varboot import plug_in_components
from varboot import recursive_design_replicate
from varboot import run_bootstrap
from varboot import sigma_alpha_matrix
from varboot import simulate_path


NEWTON = BootstrapConfig(estimator_mode=EstimatorMode.newton_raphson, b_replicates=60, base_seed=3)


def outcome(deviations: ArrayLike) -> BootstrapOutcome:
    values = np.asarray(deviations, dtype=float)
    size = values.size
    return BootstrapOutcome(
        var_stars=values,
        theta_stars=np.zeros((size, 3)),
        xi_stars=np.zeros(size),
        n=1,
        var_hat=0.0,
    )


class OriginalResiduals(FixedDesign):
    """Draws the residuals in their original order."""

    __slots__ = ()

    def draw_innovations(self, rng: np.random.Generator) -> FloatArray:
        return self.fit.residuals.copy()


class AlwaysFails(FixedDesign):
    """Every replicate raises."""

    __slots__ = ()

    def __call__(self, rng: np.random.Generator) -> Replicate:
        msg = "replicate failed"
        raise NumericalError(msg)


class TestIntervals:
    """Test EP, RT and SY construction."""

    def test_percentile_and_reversed(self) -> None:
        intervals = build_intervals(outcome(np.arange(1, 101)), 0.10)
        assert (intervals.ep.lo, intervals.ep.hi) == (-95.0, -5.0)
        assert (intervals.rt.lo, intervals.rt.hi) == (5.0, 95.0)
        assert intervals.ep.length == intervals.rt.length == 90.0

    def test_symmetric(self) -> None:
        values = np.arange(1, 51)
        intervals = build_intervals(outcome(np.concatenate((values, -values))), 0.10)
        assert (intervals.sy.lo, intervals.sy.hi) == (-45.0, 45.0)
        assert intervals.get("sy") == intervals.sy

    def test_root_n_scaling(self) -> None:
        base = outcome(np.arange(1, 101))
        scaled = BootstrapOutcome(
            var_stars=2.0 + base.var_stars / 10.0,
            theta_stars=base.theta_stars,
            xi_stars=base.xi_stars,
            n=100,
            var_hat=2.0,
        )
        intervals = build_intervals(scaled, 0.10)
        assert intervals.rt.lo == pytest.approx(2.5)
        assert intervals.rt.hi == pytest.approx(11.5)
        assert intervals.ep.lo == pytest.approx(-7.5)

    def test_too_few(self) -> None:
        with pytest.raises(SampleSizeError):
            build_intervals(outcome(np.arange(1, 40)), 0.10)

    def test_gamma(self) -> None:
        with pytest.raises(ParameterDomainError):
            build_intervals(outcome(np.arange(1, 101)), 1.0)


class TestReplicates:
    """Test single bootstrap replicates."""

    def test_seed_determinism(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        first = fixed_design_replicate(garch_fit, garch_series, 0.05, seed=4)
        second = fixed_design_replicate(garch_fit, garch_series, 0.05, seed=4)
        assert np.array_equal(first.theta, second.theta)
        assert first.var == second.var

    def test_recursive(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        replicate = recursive_design_replicate(garch_fit, garch_series, 0.05, seed=4)
        assert replicate.var > 0
        assert replicate.theta.shape == (3,)

    def test_newton_degenerate(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        runner = OriginalResiduals(
            garch_fit,
            garch_series,
            0.05,
            EstimatorMode.newton_raphson,
        )
        replicate = runner(make_rng(0))
        assert np.allclose(replicate.theta, garch_fit.theta_hat.params, atol=1e-3)
        assert replicate.xi == pytest.approx(garch_fit.xi_hat, abs=1e-3)

    def test_length_mismatch(self, garch_fit: FitResult) -> None:
        with pytest.raises(ParameterDomainError):
            FixedDesign(garch_fit, ReturnSeries([0.1] * 30), 0.05)


class TestRunBootstrap:
    """Test replicate loops."""

    def test_single_replicate(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        config = BootstrapConfig(b_replicates=1)
        result = run_bootstrap(garch_fit, garch_series, 0.05, config)
        assert result.var_stars.size == 1
        assert result.b_replicates == 1

    def test_outcome(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        result = run_bootstrap(garch_fit, garch_series, 0.05, NEWTON)
        assert result.failed_count == 0
        assert result.theta_stars.shape == (60, 3)
        assert result.var_hat == pytest.approx(-garch_fit.xi_hat * garch_fit.sigma_next)
        assert result.innovation_mean_squares is not None
        assert np.mean(result.innovation_mean_squares) == pytest.approx(
            garch_fit.mean_square_residual,
            abs=0.05,
        )
        assert np.mean(result.innovation_mean_squares) == pytest.approx(1.0, abs=0.05)
        intervals = build_intervals(result, 0.10)
        assert intervals.rt.length == pytest.approx(intervals.ep.length)

    def test_workers_agree(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        serial = run_bootstrap(garch_fit, garch_series, 0.05, NEWTON, threads=1)
        pooled = run_bootstrap(garch_fit, garch_series, 0.05, NEWTON, threads=2)
        assert np.array_equal(serial.var_stars, pooled.var_stars)
        assert np.array_equal(serial.theta_stars, pooled.theta_stars)

    def test_replicate_order(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        result = run_bootstrap(garch_fit, garch_series, 0.05, NEWTON)
        runner = FixedDesign(garch_fit, garch_series, 0.05, EstimatorMode.newton_raphson)
        order = make_rng(1).permutation(NEWTON.b_replicates)
        shuffled = [runner(make_rng(NEWTON.base_seed, int(index))).var for index in order]
        assert np.array_equal(np.sort(shuffled), np.sort(result.var_stars))

    def test_designs_agree_without_persistence(self) -> None:
        path = simulate_path(Garch11(1.0, 0.1, 0.0), StandardNormal(), 1000, seed=23)
        fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
        draws: dict[Design, FloatArray] = {}
        for design in Design:
            config = BootstrapConfig(
                design=design,
                estimator_mode=EstimatorMode.newton_raphson,
                b_replicates=2000,
                base_seed=6,
            )
            draws[design] = run_bootstrap(fit, path.series, 0.05, config).var_stars
        assert stats.ks_2samp(draws[Design.fixed], draws[Design.recursive]).pvalue > 0.01

    def test_designs_differ(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        recursive = BootstrapConfig(
            design=Design.recursive,
            estimator_mode=EstimatorMode.newton_raphson,
            b_replicates=60,
            base_seed=3,
        )
        fixed = run_bootstrap(garch_fit, garch_series, 0.05, NEWTON)
        other = run_bootstrap(garch_fit, garch_series, 0.05, recursive)
        assert other.design is Design.recursive
        assert not np.array_equal(fixed.var_stars, other.var_stars)

    def test_all_failed(
        self,
        garch_fit: FitResult,
        garch_series: ReturnSeries,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        monkeypatch.setitem(bootstrap._DESIGNS, Design.fixed, AlwaysFails)
        with pytest.raises(AllReplicatesFailedError):
            run_bootstrap(garch_fit, garch_series, 0.05, BootstrapConfig(b_replicates=5))

    def test_bad_config(self) -> None:
        with pytest.raises(ParameterDomainError):
            BootstrapConfig(b_replicates=0)


@pytest.mark.slow
class TestBootstrapLaw:
    """Bootstrap laws against their asymptotic counterparts."""

    def test_xi_law_without_dynamics(self) -> None:
        path = simulate_path(Garch11(1.0, 0.1, 0.0), StandardNormal(), 2000, seed=8)
        fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
        config = BootstrapConfig(b_replicates=499, base_seed=2)
        result = run_bootstrap(fit, path.series, 0.05, config, threads=None)
        comps = plug_in_components(fit)
        draws = make_rng(9).normal(0.0, np.sqrt(comps.zeta_alpha), 499)
        assert stats.ks_2samp(result.xi_deviations(), draws).pvalue > 0.01

    def test_newton_tracks_full(self) -> None:
        path = simulate_path(PRESETS["garch-high"], StandardNormal(), 5000, seed=12)
        fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
        full = FixedDesign(fit, path.series, 0.05, EstimatorMode.full_qmle)
        newton = FixedDesign(fit, path.series, 0.05, EstimatorMode.newton_raphson)
        pairs: list[tuple[FloatArray, FloatArray]] = []
        for index in range(200):
            try:
                exact = full(make_rng(3, index))
            except NumericalError:
                continue
            pairs.append((exact.theta, newton(make_rng(3, index)).theta))
        assert len(pairs) >= 190
        exact_thetas = np.array([theta for theta, _ in pairs])
        newton_thetas = np.array([step for _, step in pairs])
        for column in range(exact_thetas.shape[1]):
            correlation = np.corrcoef(exact_thetas[:, column], newton_thetas[:, column])[0, 1]
            assert correlation > 0.9

    def test_standard_errors(self, garch_fit: FitResult, garch_series: ReturnSeries) -> None:
        result = run_bootstrap(
            garch_fit,
            garch_series,
            0.05,
            BootstrapConfig(b_replicates=499, base_seed=5),
            threads=None,
        )
        matrix = sigma_alpha_matrix(plug_in_components(garch_fit))
        asymptotic = np.sqrt(np.diag(matrix.theta_block) / garch_fit.n)
        ratio = result.standard_errors() / asymptotic
        assert np.all((ratio > 0.6) & (ratio < 1.6))
