"""
Command-line bench for consensusprobe
"""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from .. import __version__
from ..core.config import ExperimentConfig, load_config
from ..core.engine import (
    GivenInit,
    RandomRestarts,
    SpectralInit,
    default_horizon,
    parse_init,
    random_initial_state,
    run,
    sample_variance,
    spectral_initial_state,
    worst_case_convergence_time,
)
from ..core.exceptions import (
    ArgumentError,
    ConsensusProbeError,
    DegenerateInputError,
    NumericalError,
    ScalingAbortedError,
    UnsupportedRuleError,
)
from ..core.graph import GENERATOR_KINDS, GraphSequence, first_failing_window, make_sequence
from ..core.plugin import RuleRegistry, StepRule, matrix_of, step_map
from ..core.scaling import ScalingPoint, fit_scaling, measure_scaling
from ..core.spectral import (
    LinearizationMatrix,
    eigen_decompose,
    irreducibility_check,
    lower_bound_exact,
    lower_bound_value,
    numerical_jacobian,
    spectral_certificate,
    spectral_predicted_time,
    tridiagonal_residual,
)
from ..reporting import (
    REPORTERS,
    get_reporter,
    read_matrix_csv,
    write_matrix_csv,
    write_scaling_csv,
    write_trajectory_csv,
    write_variance_csv,
)
from ..rules.params import RuleParams

# Diagnostics and progress go to stderr; reports go to stdout
console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2
EXIT_NUMERICAL = 3

# validate scans this many windows when no horizon is given
DEFAULT_VALIDATE_WINDOWS = 100


class ProbeGroup(click.Group):
    """Click group that maps usage errors to exit code 1 and honours returned codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def setup_logging(level: int) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, markup=False)],
        force=True,
    )


def handle_errors(func: Callable[..., int]) -> Callable[..., int]:
    """Map the exception hierarchy onto exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except NumericalError as e:
            logger.error(f"Numerical error: {e}")
            if e.index is not None:
                logger.error(f"Offending index: {e.index}")
            for key, value in e.diagnostics.items():
                logger.error(f"  {key}: {value}")
            return EXIT_NUMERICAL
        except ConsensusProbeError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return EXIT_USAGE

    return wrapper


def _parse_pairs(pairs: Iterable[str], flag: str) -> Dict[str, str]:
    parsed = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected KEY=VALUE, got {pair!r}", param_hint=flag)
        parsed[key.strip()] = value.strip()
    return parsed


def _parse_n_list(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return [int(n) for n in text.replace(",", " ").split()]
    except ValueError:
        raise click.BadParameter(f"expected integers, got {text!r}", param_hint="--n-list")


def experiment_options(func):
    """Flags shared by every subcommand; unset flags fall back to the config file."""
    options = [
        click.option("--rule", help="Rule tag: max-degree, metropolis, load-balancing or custom:<id>"),
        click.option(
            "--rule-param",
            "rule_param",
            multiple=True,
            metavar="KEY=VALUE",
            help="Rule policy parameter (repeatable)",
        ),
        click.option("--seq", help=f"Sequence generator: {', '.join(GENERATOR_KINDS)}"),
        click.option(
            "--seq-param",
            "seq_param",
            multiple=True,
            metavar="KEY=VALUE",
            help="Sequence generator parameter (repeatable)",
        ),
        click.option("--n", "n", type=int, help="Number of agents"),
        click.option("--n-list", "n_list", help="Comma-separated agent counts for scaling"),
        click.option("--epsilon", type=float, help="Variance shrink factor in (0, 1)"),
        click.option("--B", "B", type=int, help="Connectivity window length"),
        click.option("--seed", type=int, help="Seed for random generators and inits"),
        click.option("--init", help="spectral | random:<k> | file:<path> | vector:<v1,v2,...>"),
        click.option("--t-max", "t_max", type=int, help="Round horizon"),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory"),
        click.option("--jobs", "-j", type=int, help="Concurrent restarts or sweep points"),
        click.option("--config", "-c", "config_path", type=click.Path(exists=True), help="Configuration file"),
        click.option("--plugin-dir", type=click.Path(exists=True, file_okay=False), help="Directory of rule plug-ins"),
        click.option(
            "--format",
            "-f",
            "report_format",
            type=click.Choice(sorted(REPORTERS)),
            help="Report format",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load_experiment(ctx: click.Context, options: Dict[str, Any]) -> ExperimentConfig:
    overrides = {
        "rule": options["rule"],
        "rule_params": _parse_pairs(options["rule_param"], "--rule-param"),
        "seq": options["seq"],
        "seq_params": _parse_pairs(options["seq_param"], "--seq-param"),
        "n": options["n"],
        "n_list": _parse_n_list(options["n_list"]),
        "epsilon": options["epsilon"],
        "B": options["B"],
        "seed": options["seed"],
        "init": options["init"],
        "t_max": options["t_max"],
        "out": options["out"],
        "jobs": options["jobs"],
        "plugin_dir": options["plugin_dir"],
        "format": options["report_format"],
    }
    config = load_config(options["config_path"], overrides)
    if (ctx.obj or {}).get("log_level") is None:
        logging.getLogger().setLevel(config.log_level.upper())
    logger.debug(f"Resolved configuration: {config.to_dict()}")
    return config


def _build_rule(config: ExperimentConfig) -> StepRule:
    registry = RuleRegistry()
    if config.plugin_dir:
        loaded = registry.load_rules_from_directory(config.plugin_dir)
        logger.info(f"Loaded {len(loaded)} plug-in rules from {config.plugin_dir}")
    return registry.get(config.rule, RuleParams.from_dict(config.rule_params))


def _build_sequence(config: ExperimentConfig, n: int) -> GraphSequence:
    return make_sequence(config.seq, n, config.seq_params, config.seed)


def _window(config: ExperimentConfig, seq: GraphSequence) -> int:
    return config.B or seq.window_hint or 1


def _single_n(config: ExperimentConfig) -> int:
    if config.n is not None:
        return config.n
    strategy = parse_init(config.init, config.seed)
    if isinstance(strategy, GivenInit):
        return len(strategy.values)
    raise ArgumentError("--n is required")


def _emit(config: ExperimentConfig, data: Dict[str, Any], title: str) -> None:
    reporter = get_reporter(config.format)
    reporter.set_config({"title": title})
    click.echo(reporter.format_report(data), nl=False)


@click.group(cls=ProbeGroup)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Warnings and errors only")
@click.version_option(__version__, prog_name="consensusprobe")
@click.pass_context
def cli(ctx, verbose, quiet):
    """consensusprobe - convergence-time bench for local averaging rules"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else None
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = level
    setup_logging(level if level is not None else logging.INFO)


@click.command()
@experiment_options
@click.pass_context
@handle_errors
def simulate(ctx, **options):
    """Run one trajectory and write trajectory.csv and variance.csv"""
    config = _load_experiment(ctx, options)
    n = _single_n(config)
    rule = _build_rule(config)
    seq = _build_sequence(config, n)

    strategy = parse_init(config.init, config.seed)
    if isinstance(strategy, SpectralInit):
        x0 = spectral_initial_state(rule, seq)[1]
    elif isinstance(strategy, RandomRestarts):
        x0 = random_initial_state(n, strategy.seed, 0)
    else:
        x0 = np.array(strategy.values)
        if len(x0) != n:
            raise ArgumentError(f"Initial vector has {len(x0)} entries, --n is {n}")
    if sample_variance(x0) == 0.0:
        raise DegenerateInputError("Initial vector is at consensus; nothing to simulate")

    t_max = config.t_max
    if t_max is None:
        t_max = default_horizon(n, _window(config, seq), config.epsilon)
    trajectory = run(rule, seq, x0, t_max, seed=config.seed)

    out = Path(config.out)
    trajectory_path = write_trajectory_csv(trajectory, out / "trajectory.csv")
    variance_path = write_variance_csv(trajectory, out / "variance.csv")
    logger.info(f"Wrote {trajectory_path} and {variance_path}")

    _emit(
        config,
        {
            "rule": rule.name,
            "sequence": trajectory.descriptor,
            "n": n,
            "t_max": t_max,
            "strategy": strategy.describe(),
            "V0": float(trajectory.variance[0]),
            "V_final": float(trajectory.variance[-1]),
            "storage": "full" if trajectory.is_full else "thinned",
            "trajectory": str(trajectory_path),
            "variance": str(variance_path),
        },
        "simulate",
    )
    return EXIT_OK


@click.command()
@experiment_options
@click.pass_context
@handle_errors
def tconv(ctx, **options):
    """Measure the convergence time T(n, epsilon)"""
    config = _load_experiment(ctx, options)
    n = _single_n(config)
    rule = _build_rule(config)
    seq = _build_sequence(config, n)
    strategy = parse_init(config.init, config.seed)

    t_max = config.t_max
    if t_max is None:
        t_max = default_horizon(n, _window(config, seq), config.epsilon)
    report = worst_case_convergence_time(
        rule, seq, config.epsilon, strategy, t_max, jobs=config.jobs
    )

    data = report.to_dict()
    if n >= 3:
        data["lower_bound"] = lower_bound_value(n, config.epsilon)
        data["lower_bound_exact"] = lower_bound_exact(n, config.epsilon)
    if report.lambda2 is not None and 0.0 < report.lambda2 < 1.0:
        data["predicted_T"] = spectral_predicted_time(report.lambda2, config.epsilon)
    _emit(config, data, "tconv")

    if not report.reached:
        logger.warning(f"Threshold not reached within {t_max} rounds")
        return EXIT_FAILURE
    return EXIT_OK


@click.command()
@experiment_options
@click.pass_context
@handle_errors
def scaling(ctx, **options):
    """Sweep n, fit T ~ n^slope and audit every point against the lower bound"""
    config = _load_experiment(ctx, options)
    n_list = sorted(config.n_list)
    if len(n_list) < 3 or min(n_list) < 3:
        raise ArgumentError("scaling needs at least three agent counts, all >= 3")

    rule = _build_rule(config)
    strategy = parse_init(config.init, config.seed)
    csv_path = Path(config.out) / "scaling.csv"

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task("Measuring T(n)...", total=len(n_list))

        def on_point(point: ScalingPoint) -> None:
            progress.update(task, description=f"n={point.n}: T={point.T}")
            progress.advance(task)

        try:
            points = measure_scaling(
                lambda n: rule,
                lambda n: _build_sequence(config, n),
                n_list,
                config.epsilon,
                strategy,
                B=config.B,
                t_max=config.t_max,
                jobs=config.jobs,
                on_point=on_point,
            )
        except ScalingAbortedError as e:
            write_scaling_csv(e.points, csv_path)
            logger.error(f"Scaling aborted: {e}; partial results in {csv_path}")
            return EXIT_FAILURE

    write_scaling_csv(points, csv_path)
    fit = fit_scaling(points)
    data = fit.to_dict()
    data["csv"] = str(csv_path)
    _emit(config, data, "scaling")

    if not fit.audit_passed:
        failed = [p.n for p in fit.points if p.audit is False]
        logger.warning(f"Lower-bound audit failed for n={failed}")
        return EXIT_FAILURE
    return EXIT_OK


def _linearize(rule: StepRule, seq: GraphSequence) -> LinearizationMatrix:
    metadata = rule.get_metadata()
    graph = seq.schedule(0)
    if metadata.linear:
        return matrix_of(rule, graph)
    if metadata.smooth and metadata.local:
        return numerical_jacobian(step_map(rule, graph), np.zeros(seq.n))
    raise UnsupportedRuleError(f"Rule {rule.name} has no linearization")


@click.command()
@experiment_options
@click.option(
    "--matrix",
    "matrix_path",
    type=click.Path(exists=True, dir_okay=False),
    help="Analyse a matrix CSV instead of a rule",
)
@click.option("--save-matrix", is_flag=True, help="Write matrix.csv into --out")
@click.pass_context
@handle_errors
def spectral(ctx, matrix_path, save_matrix, **options):
    """Eigen-decompose a rule's linearization on a constant sequence"""
    config = _load_experiment(ctx, options)

    if matrix_path:
        matrix = read_matrix_csv(matrix_path)
        source = f"file:{matrix_path}"
    else:
        n = _single_n(config)
        seq = _build_sequence(config, n)
        if not seq.is_constant:
            raise ArgumentError(f"spectral needs a constant sequence, got {seq.descriptor}")
        rule = _build_rule(config)
        matrix = _linearize(rule, seq)
        source = f"{rule.name} on {seq.descriptor}"

    report = eigen_decompose(matrix)
    data: Dict[str, Any] = {"source": source, "linearization": matrix.source}
    data.update(report.to_dict())
    data["eigen_residual"] = report.eigen_residual
    data["method"] = report.method
    data["irreducible"] = irreducibility_check(matrix)
    data["tridiagonal_residual"] = tridiagonal_residual(matrix)
    data["certificate"] = spectral_certificate(matrix)
    if report.lambda2 is not None:
        data["predicted_T"] = spectral_predicted_time(report.lambda2, config.epsilon)

    if save_matrix:
        path = write_matrix_csv(matrix, Path(config.out) / "matrix.csv")
        data["matrix"] = str(path)
    _emit(config, data, "spectral")
    return EXIT_OK


@click.command()
@experiment_options
@click.pass_context
@handle_errors
def validate(ctx, **options):
    """Check that every window [kB, (k+1)B] has a connected union graph"""
    config = _load_experiment(ctx, options)
    n = _single_n(config)
    seq = _build_sequence(config, n)
    B = config.B or seq.window_hint
    if B is None:
        raise ArgumentError(f"{seq.descriptor} has no window hint; pass --B")
    horizon = config.t_max if config.t_max is not None else DEFAULT_VALIDATE_WINDOWS * B

    k = first_failing_window(seq, B, horizon)
    data: Dict[str, Any] = {"sequence": str(seq.descriptor), "B": B, "horizon": horizon}
    if k is None:
        data["pass"] = True
        data["windows"] = horizon // B
    else:
        data["pass"] = False
        data["first_failing_window"] = k
        data["window"] = (k * B, (k + 1) * B)
    _emit(config, data, "validate")

    if k is not None:
        logger.warning(f"Window k={k} [{k * B}, {(k + 1) * B}] is disconnected")
        return EXIT_FAILURE
    return EXIT_OK


# Add commands to CLI group
cli.add_command(simulate)
cli.add_command(tconv)
cli.add_command(scaling)
cli.add_command(spectral)
cli.add_command(validate)


if __name__ == "__main__":
    cli()
