"""
consensusprobe core module

Graph sequences, the rule plug-in architecture, the simulation engine,
spectral analysis and scaling studies.
"""

from .config import ConfigManager, ExperimentConfig, load_config
from .engine import (
    ConvergenceReport,
    GivenInit,
    RandomRestarts,
    SpectralInit,
    Trajectory,
    convergence_time,
    default_horizon,
    norm_convergence_time,
    norm_sandwich_holds,
    p_norm_distance,
    parse_init,
    run,
    sample_variance,
    worst_case_convergence_time,
)
from .exceptions import (
    ArgumentError,
    ConfigurationError,
    ConsensusProbeError,
    DegenerateInputError,
    InvalidRuleError,
    NumericalError,
    OutOfTheoremDomainError,
    ScalingAbortedError,
    UnsupportedRuleError,
)
from .graph import (
    GENERATOR_KINDS,
    Graph,
    GraphSequence,
    SequenceDescriptor,
    first_failing_window,
    is_connected,
    make_sequence,
    neighbors,
    union_graph,
    validate_b_connectivity,
)
from .plugin import LocalRule, RuleMetadata, RuleRegistry, StepRule, lift, matrix_of
from .scaling import ScalingFitReport, ScalingPoint, fit_scaling, measure_scaling
from .spectral import (
    LinearizationMatrix,
    SpectralReport,
    composed_jacobian_residual,
    consensus_fixed_point_check,
    eigen_decompose,
    eigenvalue_interval_check,
    lower_bound_exact,
    lower_bound_value,
    numerical_jacobian,
    spectral_certificate,
    spectral_predicted_time,
    stochasticity_check,
)

__all__ = [
    # Configuration
    "ConfigManager",
    "ExperimentConfig",
    "load_config",
    # Errors
    "ConsensusProbeError",
    "ArgumentError",
    "OutOfTheoremDomainError",
    "ConfigurationError",
    "InvalidRuleError",
    "UnsupportedRuleError",
    "DegenerateInputError",
    "NumericalError",
    "ScalingAbortedError",
    # Graphs
    "GENERATOR_KINDS",
    "Graph",
    "GraphSequence",
    "SequenceDescriptor",
    "neighbors",
    "is_connected",
    "union_graph",
    "first_failing_window",
    "validate_b_connectivity",
    "make_sequence",
    # Rules
    "LocalRule",
    "StepRule",
    "RuleMetadata",
    "RuleRegistry",
    "lift",
    "matrix_of",
    # Engine
    "Trajectory",
    "ConvergenceReport",
    "SpectralInit",
    "RandomRestarts",
    "GivenInit",
    "parse_init",
    "run",
    "sample_variance",
    "p_norm_distance",
    "convergence_time",
    "worst_case_convergence_time",
    "default_horizon",
    "norm_convergence_time",
    "norm_sandwich_holds",
    # Spectral
    "LinearizationMatrix",
    "SpectralReport",
    "numerical_jacobian",
    "composed_jacobian_residual",
    "consensus_fixed_point_check",
    "stochasticity_check",
    "eigen_decompose",
    "eigenvalue_interval_check",
    "lower_bound_value",
    "lower_bound_exact",
    "spectral_predicted_time",
    "spectral_certificate",
    # Scaling
    "ScalingPoint",
    "ScalingFitReport",
    "fit_scaling",
    "measure_scaling",
]
