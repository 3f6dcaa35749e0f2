"""
Built-in custom rules, registered as `custom:<id>`.
"""

from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..core.graph import Graph
from ..core.plugin import LocalRule, RuleMetadata
from .params import RuleParams


class IdentityRule(LocalRule):
    """Every agent keeps its value."""

    def get_metadata(self) -> RuleMetadata:
        return RuleMetadata(
            name="identity",
            description="x_i(t+1) = x_i(t)",
            linear=True,
            tags=("linear", "reference"),
        )

    def update(
        self, graph: Graph, i: int, x_i: float, neighbor_values: Sequence[float]
    ) -> float:
        return x_i

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        return np.eye(graph.n)


class CubicMeanRule(LocalRule):
    """
    Metropolis-weighted mean plus a cubic coupling.

    x_i(t+1) = x_i + sum_j [eps_ij (x_j - x_i) + c (x_j - x_i)^3]

    The cubic term is antisymmetric in (i, j), so sums are preserved, and
    it vanishes to second order at consensus, so the linearization is the
    Metropolis matrix.
    """

    def __init__(self, coefficient: float = 0.01, params: Optional[RuleParams] = None):
        self.coefficient = coefficient
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return RuleMetadata(
            name="cubic-mean",
            description="Metropolis mean with a cubic term vanishing at consensus",
            linear=False,
            smooth=True,
            tags=("nonlinear", "smooth"),
        )

    def update(
        self, graph: Graph, i: int, x_i: float, neighbor_values: Sequence[float]
    ) -> float:
        d_i = graph.degree(i)
        total = 0.0
        for j, x_j in zip(graph.neighbors(i), neighbor_values):
            diff = x_j - x_i
            weight = self.params.metropolis_weight_for(d_i, graph.degree(j))
            total += weight * diff + self.coefficient * diff**3
        return x_i + total


BUILTIN_CUSTOM_RULES: Dict[str, Callable[[], LocalRule]] = {
    "identity": IdentityRule,
    "cubic-mean": CubicMeanRule,
}
