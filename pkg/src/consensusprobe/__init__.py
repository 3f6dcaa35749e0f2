"""
consensusprobe - convergence-time bench for local averaging rules

Simulates distributed averaging on time-varying graphs, measures how
many rounds the sample variance needs to shrink by a given factor, and
checks those measurements against spectral predictions and the
quadratic lower bound for the line graph.
"""

__version__ = "1.0.0"
__author__ = "consensusprobe contributors"

# Core imports
from .core.config import ConfigManager, ExperimentConfig, load_config
from .core.engine import (
    ConvergenceReport,
    Trajectory,
    convergence_time,
    run,
    sample_variance,
    worst_case_convergence_time,
)
from .core.exceptions import ConsensusProbeError
from .core.graph import Graph, GraphSequence, make_sequence
from .core.plugin import LocalRule, RuleRegistry, StepRule, lift
from .core.scaling import ScalingFitReport, fit_scaling, measure_scaling
from .core.spectral import eigen_decompose, lower_bound_value

# Named rules
from .rules import (
    LoadBalancingRule,
    MaxDegreeRule,
    MetropolisRule,
    RuleParams,
    build_named_rule,
)

# Reporting
from .reporting import get_reporter

# UI components
from .ui.cli import cli

__all__ = [
    # Core
    "ConfigManager",
    "ExperimentConfig",
    "load_config",
    "ConsensusProbeError",
    "Graph",
    "GraphSequence",
    "make_sequence",
    "LocalRule",
    "StepRule",
    "RuleRegistry",
    "lift",
    "Trajectory",
    "ConvergenceReport",
    "run",
    "sample_variance",
    "convergence_time",
    "worst_case_convergence_time",
    "eigen_decompose",
    "lower_bound_value",
    "ScalingFitReport",
    "fit_scaling",
    "measure_scaling",
    # Rules
    "RuleParams",
    "MaxDegreeRule",
    "MetropolisRule",
    "LoadBalancingRule",
    "build_named_rule",
    # Reporting
    "get_reporter",
    # CLI
    "cli",
    "measure",
    # Metadata
    "__version__",
    "__author__",
]


def measure(
    rule: str = "metropolis",
    seq: str = "constant-line",
    n: int = 10,
    epsilon: float = 0.01,
    init: str = "spectral",
    seed: int = 0,
) -> ConvergenceReport:
    """
    Quick convergence-time measurement for simple use cases.

    Example:
        >>> import consensusprobe
        >>> consensusprobe.measure("metropolis", "constant-line", n=3).T
        6
    """
    from .core.engine import parse_init

    step_rule = RuleRegistry().get(rule)
    sequence = make_sequence(seq, n, seed=seed)
    return worst_case_convergence_time(step_rule, sequence, epsilon, parse_init(init, seed))
