"""Module contain desk-scale acceptance runs (minutes each)."""
from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from varboot import PRESETS
from varboot import BootstrapConfig
from varboot import Design
from varboot import ExperimentConfig
from varboot import IntervalKind
from varboot import ModelFamily
from varboot import NormalizedStudentT
from varboot import StandardNormal
from varboot import build_intervals
from varboot import compare_distributions
from varboot import derive_seed
from varboot import fit_two_step
from varboot import load_prices
from varboot import run_bootstrap
from varboot import run_experiment
from varboot import simulate_path
from varboot import to_returns


pytestmark = pytest.mark.slow


class TestEstimator:
    """Properties of the two-step estimator on simulated paths."""

    @pytest.mark.parametrize("dist", [StandardNormal(), NormalizedStudentT(6)])
    def test_residual_scale_identity(self, dist: StandardNormal | NormalizedStudentT) -> None:
        checked = 0
        for sim in range(50):
            path = simulate_path(PRESETS["garch-high"], dist, 1000, seed=derive_seed(31, sim))
            fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
            if not (fit.diagnostics.optimizer_converged and fit.diagnostics.interior):
                continue
            checked += 1
            assert abs(fit.mean_square_residual - 1.0) < 1e-3
        assert checked >= 40

    def test_consistency(self) -> None:
        truth = PRESETS["garch-high"]
        errors, xi_errors = [], []
        for sim in range(20):
            path = simulate_path(truth, StandardNormal(), 10_000, seed=derive_seed(41, sim))
            fit = fit_two_step(path.series, ModelFamily.garch, 0.05)
            errors.append(fit.theta_hat.params - truth.params)
            xi_errors.append(fit.xi_hat + 1.6448536)
        assert np.all(np.abs(np.mean(errors, axis=0)) < 0.02)
        assert abs(np.mean(xi_errors)) < 0.03


class TestBootstrapValidity:
    """Bootstrap law against the Monte Carlo law of the estimator."""

    def test_laws_match(self) -> None:
        cfg = ExperimentConfig.from_preset(
            "garch-high",
            "t",
            n=5000,
            s_sims=300,
            bootstrap=BootstrapConfig(b_replicates=1000),
            master_seed=13,
        )
        comparison = compare_distributions(cfg)
        assert max(comparison.theta_ks) < 0.10
        assert comparison.xi_ks < 0.10


class TestCoverage:
    """Coverage of the bootstrap intervals."""

    @pytest.fixture(scope="class")
    def fixed(self) -> ExperimentConfig:
        return ExperimentConfig.from_preset(
            "garch-high",
            "t",
            n=500,
            s_sims=200,
            bootstrap=BootstrapConfig(b_replicates=499),
            master_seed=2024,
        )

    def test_fixed_design(self, fixed: ExperimentConfig) -> None:
        report = run_experiment(fixed)
        rt = report.stats[IntervalKind.rt].avg_coverage
        sy = report.stats[IntervalKind.sy].avg_coverage
        assert 85 <= rt <= 97
        assert 85 <= sy <= 97
        assert report.ep_rt_gap > 0

    def test_recursive_design(self, fixed: ExperimentConfig) -> None:
        recursive = replace(fixed, bootstrap=replace(fixed.bootstrap, design=Design.recursive))
        fixed_report = run_experiment(fixed)
        recursive_report = run_experiment(recursive)
        rt = recursive_report.stats[IntervalKind.rt]
        assert 85 <= rt.avg_coverage <= 97
        assert rt.avg_length >= fixed_report.stats[IntervalKind.rt].avg_length


class TestRealData:
    """First window of the CAC 40 application."""

    def test_first_window(self, cac_path: Path) -> None:
        returns = to_returns(load_prices(cac_path))
        assert returns.dates is not None
        stop = sum(date <= "2017-12-31" for date in returns.dates)
        sample = returns.window(stop - 5100, 5100)
        fit = fit_two_step(sample, ModelFamily.tgarch, 0.05)
        reported = np.array([0.0246, 0.0150, 0.1340, 0.9237])
        spread = np.array([0.0039, 0.0099, 0.0112, 0.0084])
        assert np.all(np.abs(fit.theta_hat.params - reported) <= 4 * spread)
        outcome = run_bootstrap(fit, sample, 0.05, BootstrapConfig(b_replicates=999), threads=None)
        rt = build_intervals(outcome, 0.05).rt
        assert rt.lo == pytest.approx(1.39, abs=0.05)
        assert rt.hi == pytest.approx(1.58, abs=0.05)
