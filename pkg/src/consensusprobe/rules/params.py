"""
Step-size and selection policies for the named averaging rules.
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional, Union

import numpy as np

from ..core.exceptions import ConfigurationError
from ..core.graph import Graph

BOUNDARY_POLICIES = ("boundary", "equality")
TIE_BREAKS = ("lowest-index", "highest-index")

# Slack for comparing a configured step size against 1/(d+1)
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class RuleParams:
    """
    Policies for the named rules.

    step_size: max-degree epsilon(t); None uses 1/(d(t)+1)
    degree_bound: a priori upper bound on d(t) used in place of the true
        max degree when step_size is None
    metropolis_weight: "boundary" (alias "equality") for
        min(1/(d_i+1), 1/(d_j+1)), or a constant weight
    tie_break: load-balancing choice among equally valued candidates
    strict_selection: load-balancing "above"/"below" as strict inequalities
    mutual_weight: load-balancing weight a_ij of a mutual pair
    """

    step_size: Optional[float] = None
    degree_bound: Optional[int] = None
    metropolis_weight: Union[str, float] = "boundary"
    tie_break: str = "lowest-index"
    strict_selection: bool = True
    mutual_weight: float = 1.0 / 3.0

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise ConfigurationError(f"step_size must be positive, got {self.step_size}")
        if self.degree_bound is not None and self.degree_bound < 0:
            raise ConfigurationError(
                f"degree_bound must be non-negative, got {self.degree_bound}"
            )
        if isinstance(self.metropolis_weight, str):
            if self.metropolis_weight not in BOUNDARY_POLICIES:
                try:
                    object.__setattr__(
                        self, "metropolis_weight", float(self.metropolis_weight)
                    )
                except ValueError:
                    raise ConfigurationError(
                        f"metropolis_weight must be 'boundary' or a number, "
                        f"got {self.metropolis_weight!r}"
                    )
        if not isinstance(self.metropolis_weight, str) and not self.metropolis_weight > 0:
            raise ConfigurationError("metropolis_weight must be positive")
        if self.tie_break not in TIE_BREAKS:
            raise ConfigurationError(
                f"tie_break must be one of {', '.join(TIE_BREAKS)}, got {self.tie_break}"
            )
        if not 0.0 < self.mutual_weight <= 1.0 / 3.0 + _BOUND_SLACK:
            raise ConfigurationError(
                f"mutual_weight must lie in (0, 1/3], got {self.mutual_weight}"
            )

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "RuleParams":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Unknown rule parameters: {sorted(unknown)}")

        converters = {
            "step_size": float,
            "degree_bound": int,
            "mutual_weight": float,
            "strict_selection": _to_bool,
        }
        try:
            for key, convert in converters.items():
                if data.get(key) is not None:
                    data[key] = convert(data[key])
        except ValueError as e:
            raise ConfigurationError(f"Invalid rule parameter: {e}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def max_degree_epsilon(self, graph: Graph) -> float:
        """epsilon(t) for the round's graph, checked against 1/(d(t)+1)."""
        d = graph.max_degree
        if self.degree_bound is not None and self.degree_bound < d:
            raise ConfigurationError(
                f"degree_bound {self.degree_bound} is below the actual max degree {d}"
            )
        if self.step_size is not None:
            epsilon = self.step_size
        elif self.degree_bound is not None:
            epsilon = 1.0 / (self.degree_bound + 1)
        else:
            epsilon = 1.0 / (d + 1)

        if epsilon > (1.0 / (d + 1)) * (1.0 + _BOUND_SLACK):
            raise ConfigurationError(
                f"step size {epsilon} exceeds 1/(d(t)+1) = {1.0 / (d + 1)}"
            )
        return epsilon

    def metropolis_weights(self, graph: Graph) -> np.ndarray:
        """Weights epsilon_ij aligned with graph.arcs."""
        src, dst = graph.arcs
        degrees = graph.degrees
        bound = np.minimum(1.0 / (degrees[src] + 1), 1.0 / (degrees[dst] + 1))
        if self.metropolis_weight in BOUNDARY_POLICIES:
            return bound
        weight = float(self.metropolis_weight)
        if np.any(weight > bound * (1.0 + _BOUND_SLACK)):
            raise ConfigurationError(
                f"Metropolis weight {weight} exceeds min(1/(d_i+1), 1/(d_j+1)) "
                f"on some edge (smallest bound {float(bound.min()):.6g})"
            )
        return np.full(len(src), weight)

    def metropolis_weight_for(self, d_i: int, d_j: int) -> float:
        """Weight epsilon_ij for one edge given the endpoint degrees."""
        bound = min(1.0 / (d_i + 1), 1.0 / (d_j + 1))
        if self.metropolis_weight in BOUNDARY_POLICIES:
            return bound
        weight = float(self.metropolis_weight)
        if weight > bound * (1.0 + _BOUND_SLACK):
            raise ConfigurationError(
                f"Metropolis weight {weight} exceeds min(1/(d_i+1), 1/(d_j+1)) = {bound}"
            )
        return weight


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")
