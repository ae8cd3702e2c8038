"""Module contain shared fixtures and options."""
from __future__ import annotations

from pathlib import Path

import pytest

from varboot import PRESETS
from varboot import FitResult
from varboot import ModelFamily
from varboot import ReturnSeries
from varboot import StandardNormal
from varboot import fit_two_step
from varboot import simulate_path


def pytest_addoption(parser: pytest.Parser) -> None:
    """Register the path option of the CAC 40 price file."""
    parser.addoption(
        "--cac-data",
        action="store",
        default=None,
        help="date,close CSV of CAC 40 closes.",
    )


@pytest.fixture(scope="package")
def cac_path(request: pytest.FixtureRequest) -> Path:
    """CAC 40 price file or skip."""
    value = request.config.getoption("--cac-data")
    if not value:
        pytest.skip("needs --cac-data")
    return Path(value)


@pytest.fixture(scope="package")
def garch_series() -> ReturnSeries:
    """Gaussian GARCH path with high persistence."""
    return simulate_path(PRESETS["garch-high"], StandardNormal(), 500, seed=11).series


@pytest.fixture(scope="package")
def garch_fit(garch_series: ReturnSeries) -> FitResult:
    """Two-step fit of ``garch_series`` at alpha = 0.05."""
    return fit_two_step(garch_series, ModelFamily.garch, 0.05)
