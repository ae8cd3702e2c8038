"""Module contains the coverage experiment harness."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from functools import partial
from typing import Any
from typing import Mapping

import numpy as np
from scipy import stats

from ._typing import FloatArray
from .asymptotics import asymptotic_interval
from .asymptotics import plug_in_components
from .bootstrap import BootstrapConfig
from .bootstrap import build_intervals
from .bootstrap import run_bootstrap
from .enumcls import IntervalKind
from .estimation import FitConfig
from .estimation import fit_two_step
from .exceptions import ParameterDomainError
from .exceptions import VarBootError
from .interval import Interval
from .interval import check_gamma
from .parallel import map_ordered
from .seeding import derive_seed
from .volatility import Garch11
from .volatility import InnovationDist
from .volatility import ModelSpec
from .volatility import TGarch11
from .volatility import make_dist
from .volatility import simulate_path


__all__ = (
    "PRESETS",
    "ExperimentConfig",
    "SimRecord",
    "IntervalStats",
    "CoverageReport",
    "GapTable",
    "DistributionComparison",
    "run_experiment",
    "gap_table",
    "compare_distributions",
)


PRESETS: dict[str, ModelSpec] = {
    "garch-high": Garch11(0.05 * 20**2 / 252, 0.15, 0.8),
    "garch-low": Garch11(0.05 * 20**2 / 252, 0.4, 0.55),
    "tgarch-high": TGarch11(0.05 * 20 / math.sqrt(252), 0.05, 0.10, 0.8),
    "tgarch-low": TGarch11(0.05 * 20 / math.sqrt(252), 0.1, 0.3, 0.55),
}

BOOTSTRAP_KINDS = (IntervalKind.ep, IntervalKind.rt, IntervalKind.sy)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo design: DGP, sample size, levels and replicate counts."""

    spec: ModelSpec
    dist: InnovationDist
    n: int = 500
    alpha: float = 0.05
    gamma: float = 0.10
    s_sims: int = 200
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    include_asymptotic: bool = False
    master_seed: int = 0
    burn_in: int = 1000
    label: str = ""

    def __post_init__(self) -> None:
        """Check counts and levels."""
        if self.s_sims < 1:
            msg = f"s_sims must be at least 1, got {self.s_sims}."
            raise ParameterDomainError(msg)
        if self.n < 20:
            msg = f"n must be at least 20, got {self.n}."
            raise ParameterDomainError(msg)
        if not 0 < self.alpha < 1:
            msg = f"alpha must lie in (0, 1), got {self.alpha}."
            raise ParameterDomainError(msg)
        check_gamma(self.gamma)
        if self.master_seed < 0 or self.burn_in < 0:
            msg = "master_seed and burn_in must be non-negative."
            raise ParameterDomainError(msg)

    @classmethod
    def from_preset(
        cls,
        name: str,
        dist: InnovationDist | str = "t",
        **changes: Any,
    ) -> ExperimentConfig:
        """Config for one of the named parameterizations."""
        if name not in PRESETS:
            msg = f"Unknown preset '{name}', choose from {sorted(PRESETS)}."
            raise ParameterDomainError(msg)
        if isinstance(dist, str):
            dist = make_dist(dist)
        changes.setdefault("label", name)
        return cls(spec=PRESETS[name], dist=dist, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "label": self.label,
            "spec": self.spec.to_dict(),
            "dist": self.dist.to_dict(),
            "n": self.n,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "s_sims": self.s_sims,
            "bootstrap": self.bootstrap.to_dict(),
            "include_asymptotic": self.include_asymptotic,
            "master_seed": self.master_seed,
            "burn_in": self.burn_in,
        }


@dataclass(frozen=True)
class SimRecord:
    """Outcome of one simulated path."""

    index: int
    true_var: float
    var_hat: float | None = None
    intervals: dict[IntervalKind, Interval] = field(default_factory=dict)
    failed: bool = False
    reason: str = ""

    def to_row(self) -> dict[str, Any]:
        """Flat row for CSV output."""
        row: dict[str, Any] = {
            "sim": self.index,
            "true_var": self.true_var,
            "var_hat": self.var_hat,
            "failed": int(self.failed),
            "reason": self.reason,
        }
        for kind in IntervalKind:
            interval = self.intervals.get(kind)
            row[f"{kind.value}_lo"] = interval.lo if interval else None
            row[f"{kind.value}_hi"] = interval.hi if interval else None
        return row


def _or_null(value: float) -> float | None:
    return None if math.isnan(value) else value


@dataclass
class IntervalStats:
    """Counts behind coverage, below, above and average length."""

    count: int = 0
    inside: int = 0
    below: int = 0
    above: int = 0
    total_length: float = 0.0

    def add(self, interval: Interval, true_var: float) -> None:
        """Count one interval against the true VaR."""
        self.count += 1
        self.total_length += interval.length
        position = interval.position(true_var)
        if position < 0:
            self.below += 1
        elif position > 0:
            self.above += 1
        else:
            self.inside += 1

    def _percent(self, value: int) -> float:
        return 100.0 * value / self.count if self.count else math.nan

    @property
    def avg_coverage(self) -> float:
        """Share of intervals covering the true VaR, in percent."""
        return self._percent(self.inside)

    @property
    def below_rate(self) -> float:
        """Share of intervals lying below the true VaR, in percent."""
        return self._percent(self.below)

    @property
    def above_rate(self) -> float:
        """Share of intervals lying above the true VaR, in percent."""
        return self._percent(self.above)

    @property
    def avg_length(self) -> float:
        """Average interval length."""
        return self.total_length / self.count if self.count else math.nan

    def to_dict(self) -> dict[str, Any]:
        """Serializable view, null where nothing was counted."""
        return {
            "count": self.count,
            "avg_coverage": _or_null(self.avg_coverage),
            "below": _or_null(self.below_rate),
            "above": _or_null(self.above_rate),
            "avg_length": _or_null(self.avg_length),
        }


@dataclass(frozen=True, eq=False)
class CoverageReport:
    """Aggregated coverage statistics of an experiment."""

    config: ExperimentConfig
    stats: dict[IntervalKind, IntervalStats]
    failed_sims: int
    wall_time: float = 0.0
    records: tuple[SimRecord, ...] = ()

    @property
    def ep_rt_gap(self) -> float:
        """RT minus EP average coverage, percentage points."""
        return (
            self.stats[IntervalKind.rt].avg_coverage
            - self.stats[IntervalKind.ep].avg_coverage
        )

    def to_dict(self, *, timing: bool = False) -> dict[str, Any]:
        """Serializable view."""
        data: dict[str, Any] = {
            "intervals": {
                kind.value: item.to_dict()
                for kind, item in self.stats.items()
            },
            "ep_rt_gap": _or_null(self.ep_rt_gap),
            "failed_sims": self.failed_sims,
        }
        if timing:
            data["wall_time"] = self.wall_time
        return data

    def to_text(self) -> str:
        """Aligned table with coverage, below/above and length per interval."""
        header = f"{'n':>6}  {'':<4}{'coverage':>10}  {'below/above':>13}  {'length':>8}"
        lines = [header, "-" * len(header)]
        for kind, item in self.stats.items():
            split = f"{item.below_rate:.2f}/{item.above_rate:.2f}"
            lines.append(
                f"{self.config.n:>6}  {kind.name.upper():<4}"
                f"{item.avg_coverage:>10.2f}  {split:>13}  {item.avg_length:>8.3f}",
            )
        lines.append(f"failed sims: {self.failed_sims}")
        return "\n".join(lines)


def _run_sim(config: ExperimentConfig, true_xi: float, index: int) -> SimRecord:
    """Run one simulation of the experiment."""
    path = simulate_path(
        config.spec,
        config.dist,
        config.n,
        burn_in=config.burn_in,
        seed=derive_seed(config.master_seed, index, 0),
    )
    true_var = -true_xi * path.sigma_next
    boot = config.bootstrap
    try:
        fit = fit_two_step(path.series, config.spec.family, config.alpha, boot.fit_config)
        if not fit.diagnostics.optimizer_converged:
            return SimRecord(index, true_var, failed=True, reason="base fit did not converge")
        outcome = run_bootstrap(
            fit,
            path.series,
            config.alpha,
            replace(boot, base_seed=derive_seed(config.master_seed, index, 1)),
            threads=1,
        )
        intervals = build_intervals(outcome, config.gamma)
    except VarBootError as error:
        logging.warning("Simulation %s failed: %s", index, error)
        return SimRecord(index, true_var, failed=True, reason=str(error))
    found = {kind: intervals.get(kind) for kind in BOOTSTRAP_KINDS}
    if config.include_asymptotic:
        try:
            found[IntervalKind.asy] = asymptotic_interval(
                fit,
                plug_in_components(fit, config.alpha),
                config.gamma,
            )
        except VarBootError as error:
            logging.warning("Asymptotic interval of simulation %s failed: %s", index, error)
    return SimRecord(index, true_var, var_hat=intervals.var_hat, intervals=found)


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> CoverageReport:
    """Simulate, fit, bootstrap and count how often intervals hold the true VaR."""
    started = time.perf_counter()
    true_xi = cfg.dist.ppf(cfg.alpha)
    records = map_ordered(partial(_run_sim, cfg, true_xi), range(cfg.s_sims), threads)
    kinds = BOOTSTRAP_KINDS + ((IntervalKind.asy,) if cfg.include_asymptotic else ())
    stats_by_kind = {kind: IntervalStats() for kind in kinds}
    failed = 0
    for record in records:
        if record.failed:
            failed += 1
            continue
        for kind, interval in record.intervals.items():
            stats_by_kind[kind].add(interval, record.true_var)
    wall_time = time.perf_counter() - started
    logging.info(
        "Experiment %s: %s sims, %s failed, %.1f s.",
        cfg.label or cfg.spec.family.value,
        cfg.s_sims,
        failed,
        wall_time,
    )
    return CoverageReport(
        config=cfg,
        stats=stats_by_kind,
        failed_sims=failed,
        wall_time=wall_time,
        records=tuple(records),
    )


@dataclass(frozen=True)
class GapTable:
    """RT minus EP coverage gaps keyed by experiment label."""

    gaps: dict[str, float]

    @property
    def all_positive(self) -> bool:
        """True when RT beats EP everywhere."""
        return all(gap > 0 for gap in self.gaps.values())

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {
            "gaps": {label: _or_null(gap) for label, gap in self.gaps.items()},
            "all_positive": self.all_positive,
        }

    def to_text(self) -> str:
        """Aligned label/gap table."""
        width = max(len(label) for label in self.gaps)
        return "\n".join(
            f"{label:<{width}}  {gap:>7.2f}"
            for label, gap in self.gaps.items()
        )


def gap_table(reports: Mapping[str, CoverageReport]) -> GapTable:
    """Collect the EP/RT coverage gap of every report."""
    if not reports:
        msg = "gap_table needs at least one report."
        raise ParameterDomainError(msg)
    table = GapTable({label: report.ep_rt_gap for label, report in reports.items()})
    if not table.all_positive:
        logging.warning("Some RT/EP coverage gaps are not positive.")
    return table


@dataclass(frozen=True, eq=False)
class DistributionComparison:
    """Monte Carlo versus bootstrap laws of the centered estimators."""

    mc_theta: FloatArray
    boot_theta: FloatArray
    mc_xi: FloatArray
    boot_xi: FloatArray

    @property
    def theta_ks(self) -> tuple[float, ...]:
        """Two-sample KS statistic per parameter."""
        return tuple(
            float(stats.ks_2samp(self.mc_theta[:, j], self.boot_theta[:, j]).statistic)
            for j in range(self.mc_theta.shape[1])
        )

    @property
    def xi_ks(self) -> float:
        """Two-sample KS statistic of the quantile."""
        return float(stats.ks_2samp(self.mc_xi, self.boot_xi).statistic)

    def to_dict(self) -> dict[str, Any]:
        """Serializable view."""
        return {"theta_ks": list(self.theta_ks), "xi_ks": self.xi_ks}


def _mc_draw(cfg: ExperimentConfig, true_xi: float, index: int) -> FloatArray | None:
    path = simulate_path(
        cfg.spec,
        cfg.dist,
        cfg.n,
        burn_in=cfg.burn_in,
        seed=derive_seed(cfg.master_seed, index, 0),
    )
    try:
        fit = fit_two_step(path.series, cfg.spec.family, cfg.alpha, cfg.bootstrap.fit_config)
    except VarBootError as error:
        logging.warning("Simulation %s failed: %s", index, error)
        return None
    if not fit.diagnostics.optimizer_converged:
        return None
    root_n = math.sqrt(cfg.n)
    deviations = root_n * (fit.theta_hat.params - cfg.spec.params)
    return np.append(deviations, root_n * (true_xi - fit.xi_hat))


def compare_distributions(
    cfg: ExperimentConfig,
    threads: int | None = None,
) -> DistributionComparison:
    """S Monte Carlo draws against B bootstrap draws from a single path."""
    true_xi = cfg.dist.ppf(cfg.alpha)
    draws = map_ordered(partial(_mc_draw, cfg, true_xi), range(cfg.s_sims), threads)
    mc = np.vstack([draw for draw in draws if draw is not None])
    path = simulate_path(
        cfg.spec,
        cfg.dist,
        cfg.n,
        burn_in=cfg.burn_in,
        seed=derive_seed(cfg.master_seed, cfg.s_sims, 2),
    )
    fit_config: FitConfig = cfg.bootstrap.fit_config
    fit = fit_two_step(path.series, cfg.spec.family, cfg.alpha, fit_config)
    outcome = run_bootstrap(
        fit,
        path.series,
        cfg.alpha,
        replace(cfg.bootstrap, base_seed=derive_seed(cfg.master_seed, cfg.s_sims, 3)),
        threads=threads,
    )
    return DistributionComparison(
        mc_theta=mc[:, :-1],
        boot_theta=outcome.theta_deviations(),
        mc_xi=mc[:, -1],
        boot_xi=outcome.xi_deviations(),
    )
