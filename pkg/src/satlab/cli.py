"""Command line entry point.

Seven subcommands share one config format: solve and select act on a
single observation, adversary and probe walk the banded constructions,
rates runs the worst-case grid and fits a power law, verify runs the
invariant suites, constants prints the analytic constants. Exit codes:
0 success, 1 invalid input or I/O, 2 violated mathematical hypotheses,
3 nonconvergence or failed verification.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import reporting
from .adversary import make_adversarial_datum, verify_adversarial_inequalities
from .config import build_instance, load_config
from .errors import (
    ConfigError,
    DomainError,
    ExperimentError,
    HypothesisViolationError,
    InsufficientDataError,
    InvalidInputError,
    NonconvergenceError,
    NoSolutionError,
)
from .experiments import (
    constant_report,
    rate_experiment,
    run_verification,
    saturation_probe,
)
from .hilbert import norm
from .models import NoisyObservation, add_noise, unit_direction
from .rules import alpha_lower_bound_check, select_alpha
from .tikhonov import solve_nonlinear

__all__ = ["main", "run_cli", "build_parser"]

_DEFAULT_ALPHAS = (1.0, 1e-1, 1e-2, 1e-3)


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so the caller owns the exit code."""

    def error(self, message):
        raise ConfigError(f"{message}\n{self.format_usage().rstrip()}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="satlab", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    def common(sub):
        sub.add_argument("--config", required=True, help="JSON experiment config")
        sub.add_argument("--out", default=None, help="output directory override")
        sub.add_argument("--seed", type=int, default=None, help="seed override")
        sub.add_argument("--jobs", type=int, default=1, help="worker processes for grids")
        sub.add_argument("--quiet", action="store_true", help="suppress progress output")
        return sub

    sub = common(commands.add_parser("solve", help="one Tikhonov solve"))
    sub.add_argument("--alpha", type=float, required=True, help="regularization parameter")
    sub.add_argument("--delta", type=float, default=0.0, help="noise level (0 = exact data)")

    sub = common(commands.add_parser("select", help="run the configured choice rule once"))
    sub.add_argument("--delta", type=float, default=None,
                     help="noise level (default: largest grid level)")

    common(commands.add_parser("adversary", help="banded worst-case inequality table"))
    common(commands.add_parser("rates", help="worst-case error grid and rate fit"))
    common(commands.add_parser("probe", help="saturation probe along delta_k = lam_k"))
    common(commands.add_parser("verify", help="run all invariant suites"))
    common(commands.add_parser("constants", help="report the analytic constants"))
    return parser


def _prepare(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(
            config,
            grid=dataclasses.replace(config.grid, seed=args.seed),
            rule=dataclasses.replace(config.rule, seed=args.seed),
        )
    if args.out is not None:
        config = dataclasses.replace(
            config, output=dataclasses.replace(config.output, directory=args.out)
        )
    out_dir = config.output.directory
    os.makedirs(out_dir, exist_ok=True)
    return config, build_instance(config), out_dir


def _say(args, message):
    if not args.quiet:
        print(message)


def _path(out_dir, name):
    return os.path.join(out_dir, name)


def _observation(instance, delta, seed) -> NoisyObservation:
    if delta == 0.0:
        return NoisyObservation(y_noisy=instance.y_exact, delta=0.0)
    direction = unit_direction(instance.model.dim_y, seed=(seed, 0))
    return add_noise(instance, delta, direction)


def _cmd_solve(args) -> int:
    config, instance, out_dir = _prepare(args)
    observation = _observation(instance, args.delta, config.grid.seed)
    result = solve_nonlinear(
        instance.model, args.alpha, observation.y_noisy, instance.x_prior,
        multistart=config.rule.multistart, seed=(config.grid.seed, 1),
    )
    payload = {
        "alpha": result.alpha,
        "delta": observation.delta,
        "converged": result.converged,
        "iterations": result.iterations,
        "data_residual": result.data_residual,
        "euler_residual": result.euler_residual,
        "functional_value": result.functional_value,
        "error": float(norm(result.x - instance.x_true)),
    }
    if "json" in config.output.formats:
        reporting.write_json(_path(out_dir, "solve.json"), payload)
    _say(args, "alpha={alpha:.6g} converged={converged} error={error:.6g} "
               "residual={data_residual:.6g}".format(**payload))
    return 0 if result.converged else 3


def _cmd_select(args) -> int:
    config, instance, out_dir = _prepare(args)
    delta = args.delta if args.delta is not None else config.grid.deltas[0]
    observation = _observation(instance, delta, config.grid.seed)
    selection = select_alpha(
        config.rule_name, instance.model, observation, instance.x_prior, config.rule
    )
    payload = {
        "rule": selection.rule,
        "alpha": selection.alpha,
        "delta": delta,
        "target": config.rule.tau * delta,
        "evaluations": selection.evaluations,
        "data_residual": selection.solution.data_residual,
        "converged": selection.solution.converged,
        "error": float(norm(selection.solution.x - instance.x_true)),
    }
    source = instance.source
    if source is not None and source.nu == 0.5 and selection.rule != "apriori":
        check = alpha_lower_bound_check(selection, config.rule, instance.source_norm, delta)
        payload["floor"] = {
            "passed": check.passed, "bound": check.bound, "margin": check.margin,
        }
    if "json" in config.output.formats:
        reporting.write_json(_path(out_dir, "select.json"), payload)
    _say(args, "rule={rule} alpha={alpha:.6g} residual={data_residual:.6g} "
               "target={target:.6g}".format(**payload))
    return 0 if selection.solution.converged else 3


def _cmd_adversary(args) -> int:
    config, instance, out_dir = _prepare(args)
    k_lo, k_hi = config.grid.k_range
    alphas = config.grid.alphas or _DEFAULT_ALPHAS
    checks = []
    for k in range(k_lo, k_hi + 1):
        lam_k = float(instance.linearization.eigenvalues[k - 1])
        datum = make_adversarial_datum(instance, lam_k)
        for alpha in alphas:
            checks.append(verify_adversarial_inequalities(instance, datum, alpha))
    if "csv" in config.output.formats:
        reporting.write_csv(
            _path(out_dir, "adversary.csv"),
            reporting.ADVERSARY_HEADER,
            reporting.adversary_rows(checks),
        )
    if "json" in config.output.formats:
        reporting.write_json(
            _path(out_dir, "adversary.json"), reporting.adversary_payload(checks)
        )
    passed = sum(1 for c in checks if c.all_passed)
    _say(args, f"adversarial cells passed: {passed}/{len(checks)}")
    return 0


def _cmd_rates(args) -> int:
    config, instance, out_dir = _prepare(args)
    report = rate_experiment(
        instance,
        config.rule_name,
        config.grid.deltas,
        config.rule,
        n_random=config.grid.n_random,
        seed=config.grid.seed,
        jobs=args.jobs,
    )
    formats = config.output.formats
    if "csv" in formats:
        reporting.write_csv(_path(out_dir, "rates.csv"),
                            reporting.RATES_HEADER, reporting.rate_rows(report))
        reporting.write_csv(_path(out_dir, "rates_directions.csv"),
                            reporting.DIRECTIONS_HEADER, reporting.direction_rows(report))
    if "json" in formats:
        reporting.write_json(_path(out_dir, "rates.json"), reporting.rate_payload(report))
    if "svg" in formats:
        reporting.write_loglog_svg(
            _path(out_dir, "rates.svg"),
            [(s.delta, s.worst_error) for s in report.samples],
            report.slope,
            report.intercept,
            title="worst-case error vs noise level",
            xlabel="noise level",
            ylabel="worst-case error",
        )
    _say(args, f"rule={report.rule} slope={report.slope:.4f} "
               f"r_squared={report.r_squared:.4f} samples={len(report.samples)} "
               f"failures={len(report.failures)}")
    return 0


def _cmd_probe(args) -> int:
    config, instance, out_dir = _prepare(args)
    report = saturation_probe(instance, config.rule_name, config.grid.k_range, config.rule)
    if "csv" in config.output.formats:
        reporting.write_csv(_path(out_dir, "probe.csv"),
                            reporting.SATURATION_HEADER, reporting.saturation_rows(report))
    if "json" in config.output.formats:
        reporting.write_json(_path(out_dir, "probe.json"),
                             reporting.saturation_payload(report))
    _say(args, f"ratio_floor={report.ratio_floor:.6g} "
               f"first_ratio={report.first_ratio:.6g} "
               f"delta_over_alpha_trend={report.delta_over_alpha_trend:.6g}")
    return 0


def _cmd_verify(args) -> int:
    config, instance, out_dir = _prepare(args)
    alphas = config.grid.alphas or _DEFAULT_ALPHAS
    report = run_verification(
        instance,
        config.rule,
        rule=config.rule_name,
        deltas=config.grid.deltas[:4],
        alphas=alphas,
        k_range=config.grid.k_range,
        seed=config.grid.seed,
    )
    if "json" in config.output.formats:
        reporting.write_json(_path(out_dir, "verify.json"),
                             reporting.verification_payload(report))
    for name, suite in report.suites:
        _say(args, f"{name}: passed={suite.passed} failed={suite.failed} "
                   f"skipped={suite.skipped}")
    if not report.all_passed:
        _say(args, f"verification FAILED ({report.total_failed} checks)")
        return 3
    _say(args, "verification passed")
    return 0


def _cmd_constants(args) -> int:
    config, instance, out_dir = _prepare(args)
    report = constant_report(instance, config.rule, seed=config.grid.seed)
    payload = reporting.constants_payload(report)
    if "json" in config.output.formats:
        reporting.write_json(_path(out_dir, "constants.json"), payload)
    for key in ("kind", "kappa0", "lipschitz_analytic", "lipschitz_sampled",
                "derivative_sup", "prior_gap_norm", "lipschitz_times_norm_u",
                "c0_range", "c0_rule", "comparison_factor"):
        _say(args, f"{key}={payload[key]}")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "select": _cmd_select,
    "adversary": _cmd_adversary,
    "rates": _cmd_rates,
    "probe": _cmd_probe,
    "verify": _cmd_verify,
    "constants": _cmd_constants,
}


def run_cli(argv) -> int:
    """Parse argv and run one subcommand; raises on failure."""
    parser = build_parser()
    args = parser.parse_args(argv)
    return _COMMANDS[args.command](args)


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        return run_cli(list(argv))
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 1
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (HypothesisViolationError, DomainError, NoSolutionError) as exc:
        print(f"hypothesis error: {exc}", file=sys.stderr)
        return 2
    except (NonconvergenceError, InsufficientDataError, ExperimentError) as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
