"""Module contains the rolling-window VaR analysis."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from functools import partial
from typing import Any

from .asymptotics import asymptotic_interval
from .asymptotics import plug_in_components
from .bootstrap import BootstrapConfig
from .bootstrap import build_intervals
from .bootstrap import run_bootstrap
from .data import PriceSeries
from .data import to_returns
from .enumcls import Design
from .enumcls import ModelFamily
from .estimation import fit_two_step
from .estimation import var_point_estimate
from .exceptions import ParameterDomainError
from .exceptions import SampleSizeError
from .exceptions import VarBootError
from .interval import Interval
from .interval import check_gamma
from .parallel import map_ordered
from .seeding import derive_seed
from .volatility import ReturnSeries


__all__ = (
    "RollingConfig",
    "RollingRecord",
    "rolling_var",
)


@dataclass(frozen=True)
class RollingConfig:
    """Window length, number of windows and the interval settings."""

    window_n: int
    steps: int = 1
    family: ModelFamily = ModelFamily.tgarch
    alpha: float = 0.05
    gamma: float = 0.05
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    include_asymptotic: bool = True
    include_recursive: bool = False

    def __post_init__(self) -> None:
        """Check window settings."""
        object.__setattr__(self, "family", ModelFamily(self.family))
        if self.window_n < 20 or self.steps < 1:
            msg = f"Need window_n >= 20 and steps >= 1, got {self.window_n}, {self.steps}."
            raise ParameterDomainError(msg)
        if not 0 < self.alpha < 1:
            msg = f"alpha must lie in (0, 1), got {self.alpha}."
            raise ParameterDomainError(msg)
        check_gamma(self.gamma)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "window_n": self.window_n,
            "steps": self.steps,
            "family": self.family.value,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "bootstrap": self.bootstrap.to_dict(),
            "include_asymptotic": self.include_asymptotic,
            "include_recursive": self.include_recursive,
        }


@dataclass(frozen=True)
class RollingRecord:
    """Next-day VaR of one window."""

    window: int
    date: str
    var_hat: float | None = None
    rt: Interval | None = None
    rt_recursive: Interval | None = None
    asy: Interval | None = None
    theta_hat: dict[str, Any] | None = None
    realized: float | None = None
    failed: bool = False
    reason: str = ""

    def to_row(self) -> dict[str, Any]:
        """Flat row for CSV output."""
        row: dict[str, Any] = {
            "window": self.window,
            "date": self.date,
            "var_hat": self.var_hat,
            "realized": self.realized,
            "failed": int(self.failed),
            "reason": self.reason,
        }
        for name in ("rt", "rt_recursive", "asy"):
            interval = getattr(self, name)
            row[f"{name}_lo"] = interval.lo if interval else None
            row[f"{name}_hi"] = interval.hi if interval else None
        theta = self.theta_hat or {}
        for key, value in theta.items():
            if key != "family":
                row[key] = value
        return row

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        data = {
            "window": self.window,
            "date": self.date,
            "var_hat": self.var_hat,
            "realized": self.realized,
            "theta_hat": self.theta_hat,
            "failed": self.failed,
        }
        for name in ("rt", "rt_recursive", "asy"):
            interval = getattr(self, name)
            if interval is not None:
                data[name] = interval.to_dict()
        if self.reason:
            data["reason"] = self.reason
        return data


def _window_label(series: ReturnSeries, index: int) -> str:
    if series.dates is not None and index < series.n:
        return series.dates[index]
    return f"t+{index}"


def _run_window(series: ReturnSeries, cfg: RollingConfig, window: int) -> RollingRecord:
    """Fit and bootstrap one window."""
    stop = window + cfg.window_n
    label = _window_label(series, stop)
    realized = float(series.values[stop]) if stop < series.n else None
    sample = series.window(window, cfg.window_n)
    boot = cfg.bootstrap
    try:
        fit = fit_two_step(sample, cfg.family, cfg.alpha, boot.fit_config)
        fixed = run_bootstrap(
            fit,
            sample,
            cfg.alpha,
            replace(boot, design=Design.fixed, base_seed=derive_seed(boot.base_seed, window)),
            threads=1,
        )
        rt = build_intervals(fixed, cfg.gamma).rt
    except VarBootError as error:
        logging.warning("Rolling window %s failed: %s", window, error)
        return RollingRecord(window, label, realized=realized, failed=True, reason=str(error))

    rt_recursive = asy = None
    if cfg.include_recursive:
        try:
            recursive = run_bootstrap(
                fit,
                sample,
                cfg.alpha,
                replace(
                    boot,
                    design=Design.recursive,
                    base_seed=derive_seed(boot.base_seed, window, 1),
                ),
                threads=1,
            )
            rt_recursive = build_intervals(recursive, cfg.gamma).rt
        except VarBootError as error:
            logging.warning("Recursive bootstrap of window %s failed: %s", window, error)
    if cfg.include_asymptotic:
        try:
            asy = asymptotic_interval(fit, plug_in_components(fit), cfg.gamma)
        except VarBootError as error:
            logging.warning("Asymptotic interval of window %s failed: %s", window, error)
    return RollingRecord(
        window=window,
        date=label,
        var_hat=var_point_estimate(fit).value,
        rt=rt,
        rt_recursive=rt_recursive,
        asy=asy,
        theta_hat=fit.theta_hat.to_dict(),
        realized=realized,
        failed=not fit.converged,
        reason="" if fit.converged else "fit not converged or off the residual scale",
    )


def rolling_var(
    data: PriceSeries | ReturnSeries,
    cfg: RollingConfig,
    threads: int | None = None,
) -> list[RollingRecord]:
    """Fit every window [w, w + n) and report the next-day VaR with intervals."""
    series = to_returns(data) if isinstance(data, PriceSeries) else data
    if cfg.window_n + cfg.steps > series.n + 1:
        msg = (
            f"{cfg.steps} windows of {cfg.window_n} returns need "
            f"{cfg.window_n + cfg.steps - 1} returns, got {series.n}."
        )
        raise SampleSizeError(msg)
    records = map_ordered(partial(_run_window, series, cfg), range(cfg.steps), threads)
    failed = sum(record.failed for record in records)
    logging.info("Rolling analysis: %s windows, %s flagged.", cfg.steps, failed)
    return records
