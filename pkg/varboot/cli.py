"""Module contains the command-line front end."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Sequence

import numpy as np
import pandas as pd

from . import __version__
from .asymptotics import asymptotic_interval
from .asymptotics import plug_in_components
from .asymptotics import population_components
from .asymptotics import sigma_alpha_matrix
from .bootstrap import BootstrapConfig
from .bootstrap import build_intervals
from .bootstrap import run_bootstrap
from .config import load_config
from .config import section_for
from .config import validate_options
from .data import load_prices
from .data import load_returns
from .data import to_returns
from .data import write_returns
from .enumcls import DataFormat
from .enumcls import Design
from .enumcls import EstimatorMode
from .enumcls import ModelFamily
from .enumcls import PresampleRule
from .estimation import FitConfig
from .estimation import fit_two_step
from .exceptions import ConfigError
from .exceptions import VarBootError
from .montecarlo import PRESETS
from .montecarlo import ExperimentConfig
from .montecarlo import run_experiment
from .rolling import RollingConfig
from .rolling import rolling_var
from .store import ResultStore
from .volatility import ModelSpec
from .volatility import ReturnSeries
from .volatility import build_spec
from .volatility import make_dist
from .volatility import simulate_path


__all__ = (
    "build_parser",
    "main",
)


FULL_SCALE = 2000

# Options that never change results and stay out of the emitted config.
_RUNTIME_OPTIONS = frozenset({
    "command",
    "handler",
    "config",
    "output",
    "threads",
    "debug",
    "store",
    "timing",
    "records",
})


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file with option values.")
    common.add_argument("--output", help="Write output here instead of stdout.")
    common.add_argument("--threads", type=int, help="Worker processes.")
    common.add_argument("--debug", action="store_true", help="Debug logging.")
    common.add_argument("--store", help="SQLite file recording per-item results.")
    common.add_argument("--timing", action="store_true", help="Report wall time.")
    return common


def _model_options(parser: argparse.ArgumentParser, family: str = "garch") -> None:
    parser.add_argument("--family", choices=[item.value for item in ModelFamily], default=family)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument(
        "--presample",
        choices=[item.value for item in PresampleRule],
        default=PresampleRule.stationary.value,
    )
    parser.add_argument("--max-iterations", type=int, default=5000)
    parser.add_argument("--tolerance", type=float, default=1e-9)
    parser.add_argument("--restarts", type=int, default=3)


def _input_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--returns", help="date,return CSV.")
    parser.add_argument("--prices", help="date,close price file.")
    parser.add_argument(
        "--price-format",
        choices=[item.value for item in DataFormat],
        default=DataFormat.csv.value,
    )
    parser.add_argument("--date-column", default="date")
    parser.add_argument("--close-column", default="close")


def _bootstrap_options(parser: argparse.ArgumentParser, gamma: float) -> None:
    parser.add_argument("--design", choices=[item.value for item in Design], default="fixed")
    parser.add_argument(
        "--mode",
        choices=[item.value for item in EstimatorMode],
        default=EstimatorMode.full_qmle.value,
    )
    parser.add_argument("--b", type=int, default=499, help="Bootstrap replicates.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--gamma", type=float, default=gamma)


def _dist_options(parser: argparse.ArgumentParser, dist: str) -> None:
    parser.add_argument("--dist", choices=["normal", "t"], default=dist)
    parser.add_argument("--nu", type=int, default=6)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    """Top-level parser and the parser of every subcommand."""
    parser = argparse.ArgumentParser(
        prog="varboot",
        description="Conditional VaR estimation with bootstrap confidence intervals.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    sub: dict[str, argparse.ArgumentParser] = {}

    simulate = commands.add_parser("simulate", parents=[common], help="Simulate returns.")
    simulate.add_argument("--preset", choices=sorted(PRESETS))
    simulate.add_argument("--family", choices=[item.value for item in ModelFamily])
    simulate.add_argument("--params", type=float, nargs="+")
    _dist_options(simulate, "normal")
    simulate.add_argument("--n", type=int, default=500)
    simulate.add_argument("--burn-in", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.set_defaults(handler=cmd_simulate)
    sub["simulate"] = simulate

    fit = commands.add_parser("fit", parents=[common], help="Two-step estimate.")
    _input_options(fit)
    _model_options(fit)
    fit.add_argument("--asymptotic", action="store_true", help="Add asymptotic SEs and interval.")
    fit.add_argument("--gamma", type=float, default=0.05)
    fit.add_argument("--bandwidth-exponent", type=float, default=0.2)
    fit.set_defaults(handler=cmd_fit)
    sub["fit"] = fit

    boot = commands.add_parser("bootstrap", parents=[common], help="Bootstrap intervals.")
    _input_options(boot)
    _model_options(boot)
    _bootstrap_options(boot, 0.05)
    boot.set_defaults(handler=cmd_bootstrap)
    sub["bootstrap"] = boot

    mc = commands.add_parser("mc", parents=[common], help="Coverage experiment.")
    mc.add_argument("--preset", choices=sorted(PRESETS), default="garch-high")
    _dist_options(mc, "t")
    mc.add_argument("--n", type=int, default=500)
    mc.add_argument("--alpha", type=float, default=0.05)
    mc.add_argument("--s", type=int, default=200, help="Monte Carlo paths.")
    mc.add_argument("--burn-in", type=int, default=1000)
    mc.add_argument("--asymptotic", action="store_true")
    mc.add_argument("--full-scale", action="store_true", help="S = B = 2000.")
    mc.add_argument("--format", choices=["json", "text"], default="json")
    mc.add_argument(
        "--presample",
        choices=[item.value for item in PresampleRule],
        default=PresampleRule.stationary.value,
    )
    _bootstrap_options(mc, 0.10)
    mc.set_defaults(handler=cmd_mc)
    sub["mc"] = mc

    rolling = commands.add_parser("rolling", parents=[common], help="Rolling windows.")
    _input_options(rolling)
    _model_options(rolling, family="tgarch")
    _bootstrap_options(rolling, 0.05)
    rolling.add_argument("--window", type=int, help="Returns per window.")
    rolling.add_argument("--steps", type=int, default=1)
    rolling.add_argument("--recursive", action="store_true", help="Add recursive-design RT.")
    rolling.add_argument("--no-asymptotic", action="store_true")
    rolling.add_argument("--records", help="Also write window records as CSV.")
    rolling.set_defaults(handler=cmd_rolling)
    sub["rolling"] = rolling

    zeta = commands.add_parser("zeta", parents=[common], help="Population components.")
    zeta.add_argument("--dist", choices=["normal", "t"], nargs="+", default=["normal", "t"])
    zeta.add_argument("--nu", type=int, default=6)
    zeta.add_argument("--alpha", type=float, nargs="+", default=[0.01, 0.05, 0.10])
    zeta.add_argument("--format", choices=["json", "text"], default="text")
    zeta.set_defaults(handler=cmd_zeta)
    sub["zeta"] = zeta
    return parser, sub


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _resolved(args: argparse.Namespace) -> dict[str, Any]:
    return {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in _RUNTIME_OPTIONS
    }


def _document(
    args: argparse.Namespace,
    results: Any,
    failures: Any = None,
    seed: int | None = None,
) -> str:
    payload = {
        "config": _resolved(args),
        "results": results,
        "failures": failures if failures is not None else [],
        "version": __version__,
        "seed": seed,
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def _fit_config(args: argparse.Namespace) -> FitConfig:
    return FitConfig(
        max_iterations=args.max_iterations,
        tolerance=args.tolerance,
        restarts=args.restarts,
        presample=PresampleRule(args.presample),
    )


def _bootstrap_config(args: argparse.Namespace, fit_config: FitConfig) -> BootstrapConfig:
    return BootstrapConfig(
        design=Design(args.design),
        estimator_mode=EstimatorMode(args.mode),
        b_replicates=args.b,
        base_seed=args.seed,
        fit_config=fit_config,
    )


def _load_series(args: argparse.Namespace) -> ReturnSeries:
    """Read returns or prices named on the command line."""
    if args.returns:
        return load_returns(args.returns)
    if args.prices:
        prices = load_prices(
            args.prices,
            args.price_format,
            date_column=args.date_column,
            close_column=args.close_column,
        )
        return to_returns(prices)
    msg = "Give --returns or --prices."
    raise ConfigError(msg)


def _simulation_spec(args: argparse.Namespace) -> ModelSpec:
    if args.params:
        if not args.family:
            msg = "--params needs --family."
            raise ConfigError(msg)
        return build_spec(args.family, args.params)
    if args.preset:
        return PRESETS[args.preset]
    msg = "Give --preset or --family with --params."
    raise ConfigError(msg)


def cmd_simulate(args: argparse.Namespace) -> None:
    """Write a simulated return path as date,return CSV."""
    path = simulate_path(
        _simulation_spec(args),
        make_dist(args.dist, args.nu),
        args.n,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    logging.info("Simulated %s returns, sigma_next %.6f.", args.n, path.sigma_next)
    if args.output:
        write_returns(path.series, args.output)
        return
    write_returns(path.series, sys.stdout)


def cmd_fit(args: argparse.Namespace) -> None:
    """Two-step fit with optional asymptotic standard errors."""
    series = _load_series(args)
    fit = fit_two_step(series, ModelFamily(args.family), args.alpha, _fit_config(args))
    results: dict[str, Any] = {"fit": fit.to_dict()}
    if args.asymptotic:
        comps = plug_in_components(fit, bandwidth_exponent=args.bandwidth_exponent)
        matrix = sigma_alpha_matrix(comps)
        variances = np.clip(np.diag(matrix.mat), 0.0, None) / fit.n
        results["asymptotic"] = {
            "components": comps.to_dict(),
            "standard_errors": dict(zip(
                (*fit.theta_hat.names, "xi"),
                np.sqrt(variances).tolist(),
            )),
            "interval": asymptotic_interval(fit, comps, args.gamma).to_dict(),
        }
    _emit(args, _document(args, results))


def cmd_bootstrap(args: argparse.Namespace) -> None:
    """Bootstrap confidence intervals for one series."""
    series = _load_series(args)
    fit_config = _fit_config(args)
    fit = fit_two_step(series, ModelFamily(args.family), args.alpha, fit_config)
    outcome = run_bootstrap(
        fit,
        series,
        args.alpha,
        _bootstrap_config(args, fit_config),
        threads=args.threads,
    )
    intervals = build_intervals(outcome, args.gamma)
    results = {
        "fit": fit.to_dict(),
        "bootstrap": outcome.to_dict(),
        "intervals": intervals.to_dict(),
    }
    failures = {"failed_replicates": outcome.failed_count}
    _emit(args, _document(args, results, failures, seed=args.seed))


def cmd_mc(args: argparse.Namespace) -> None:
    """Run a coverage experiment."""
    if args.full_scale:
        logging.warning("Full scale S = B = %s runs for a long time.", FULL_SCALE)
        args.s = args.b = FULL_SCALE
    fit_config = FitConfig(presample=PresampleRule(args.presample))
    cfg = ExperimentConfig.from_preset(
        args.preset,
        make_dist(args.dist, args.nu),
        n=args.n,
        alpha=args.alpha,
        gamma=args.gamma,
        s_sims=args.s,
        bootstrap=_bootstrap_config(args, fit_config),
        include_asymptotic=args.asymptotic,
        master_seed=args.seed,
        burn_in=args.burn_in,
    )
    report = run_experiment(cfg, threads=args.threads)
    if args.store:
        with ResultStore(args.store) as store:
            store.save_run("mc", cfg.to_dict(), [record.to_row() for record in report.records])
    if args.format == "text":
        _emit(args, report.to_text())
        return
    failures = {"failed_sims": report.failed_sims}
    _emit(
        args,
        _document(args, report.to_dict(timing=args.timing), failures, seed=args.seed),
    )


def cmd_rolling(args: argparse.Namespace) -> None:
    """Rolling-window VaR with bootstrap and asymptotic intervals."""
    if args.window is None:
        msg = "rolling needs --window."
        raise ConfigError(msg)
    series = _load_series(args)
    fit_config = _fit_config(args)
    cfg = RollingConfig(
        window_n=args.window,
        steps=args.steps,
        family=ModelFamily(args.family),
        alpha=args.alpha,
        gamma=args.gamma,
        bootstrap=_bootstrap_config(args, fit_config),
        include_asymptotic=not args.no_asymptotic,
        include_recursive=args.recursive,
    )
    records = rolling_var(series, cfg, threads=args.threads)
    rows = [record.to_row() for record in records]
    if args.records:
        pd.DataFrame(rows).to_csv(args.records, index=False)
    if args.store:
        with ResultStore(args.store) as store:
            store.save_run("rolling", cfg.to_dict(), rows)
    failures = [record.window for record in records if record.failed]
    results = [record.to_dict() for record in records]
    _emit(args, _document(args, results, failures, seed=args.seed))


def cmd_zeta(args: argparse.Namespace) -> None:
    """Table of population components per law and level."""
    rows = []
    for name in args.dist:
        dist = make_dist(name, args.nu)
        for alpha in args.alpha:
            data = population_components(dist, alpha).to_dict()
            data["dist"] = name if name == "normal" else f"t({args.nu})"
            rows.append(data)
    if args.format == "json":
        _emit(args, _document(args, rows))
        return
    header = (
        f"{'dist':<7}{'alpha':>7}{'xi':>10}{'f(xi)':>9}{'kappa':>8}"
        f"{'p':>9}{'lambda':>10}{'zeta':>9}"
    )
    lines = [header]
    for row in rows:
        lam = round(row["lambda_alpha"], 4) + 0.0
        lines.append(
            f"{row['dist']:<7}{row['alpha']:>7.3f}{row['xi']:>10.4f}{row['f_xi']:>9.4f}"
            f"{row['kappa']:>8.2f}{row['p_alpha']:>9.4f}{lam:>10.4f}"
            f"{row['zeta_alpha']:>9.2f}",
        )
    _emit(args, "\n".join(lines))


def _parse(
    argv: Sequence[str] | None,
) -> argparse.Namespace:
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        command = commands[args.command]
        options = section_for(load_config(args.config), args.command)
        command.set_defaults(**validate_options(command, options))
        args = parser.parse_args(argv)
    return args


def main(argv: Sequence[str] | None = None) -> int:
    """Run a subcommand; returns the process exit code."""
    try:
        args = _parse(argv)
    except ConfigError as error:
        sys.stderr.write(f"error: {error}\n")
        return error.exit_code
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.WARNING)
    handler: Callable[[argparse.Namespace], None] = args.handler
    try:
        handler(args)
    except VarBootError as error:
        logging.debug("Command %s failed.", args.command, exc_info=True)
        sys.stderr.write(f"error: {error}\n")
        return error.exit_code
    except Exception:
        logging.exception("Unexpected failure in %s.", args.command)
        return 1
    return 0
