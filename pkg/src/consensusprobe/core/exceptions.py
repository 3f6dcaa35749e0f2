"""
Exception hierarchy for consensusprobe.

The CLI maps these onto exit codes, so every failure a user can trigger
should surface as one of these classes.
"""

from typing import Any, Dict, List, Optional


class ConsensusProbeError(Exception):
    """Base exception for consensusprobe."""

    pass


class ArgumentError(ConsensusProbeError, ValueError):
    """Raised when an operation is called outside its preconditions."""

    pass


class OutOfTheoremDomainError(ArgumentError):
    """Raised when a bound is evaluated where the theorem does not apply."""

    pass


class ConfigurationError(ConsensusProbeError):
    """Raised for invalid policies, config files or config keys."""

    pass


class InvalidRuleError(ConfigurationError):
    """Raised when a plug-in rule fails registration."""

    pass


class UnsupportedRuleError(ConsensusProbeError):
    """Raised when an operation needs a capability the rule lacks."""

    pass


class DegenerateInputError(ConsensusProbeError):
    """Raised when the initial vector is already at consensus."""

    pass


class NumericalError(ConsensusProbeError):
    """Raised on non-finite values or eigensolver failure."""

    def __init__(
        self,
        message: str,
        index: Optional[int] = None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.index = index
        self.diagnostics = diagnostics or {}


class ScalingAbortedError(ConsensusProbeError):
    """Raised when a scaling sweep hits a point that never converged."""

    def __init__(self, message: str, points: List[Any]):
        super().__init__(message)
        self.points = points
