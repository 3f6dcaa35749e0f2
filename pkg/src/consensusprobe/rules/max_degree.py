"""Max-degree averaging: x_i += epsilon(t) * sum_j (x_j - x_i)."""

from typing import Optional, Sequence

import numpy as np

from ..core.exceptions import ArgumentError
from ..core.graph import Graph
from ..core.plugin import LocalRule, RuleMetadata, StepRule
from .params import RuleParams

METADATA = RuleMetadata(
    name="max-degree",
    description="Uniform step epsilon(t) <= 1/(d(t)+1) on every edge",
    linear=True,
    local=True,
    smooth=True,
    variance_monotone=True,
    tags=("linear", "doubly-stochastic"),
)


class MaxDegreeRule(StepRule):
    def __init__(self, params: Optional[RuleParams] = None):
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return METADATA

    def step(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        x = _as_state(graph, x)
        epsilon = self.params.max_degree_epsilon(graph)
        src, dst = graph.arcs
        if len(src) == 0:
            return x.copy()
        acc = np.bincount(src, weights=x[dst] - x[src], minlength=graph.n)
        return x + epsilon * acc

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        epsilon = self.params.max_degree_epsilon(graph)
        matrix = np.zeros((graph.n, graph.n))
        src, dst = graph.arcs
        matrix[src, dst] = epsilon
        matrix[np.diag_indices(graph.n)] = 1.0 - epsilon * graph.degrees
        return matrix


class MaxDegreeLocalRule(LocalRule):
    """Per-agent form of the max-degree rule; lifts to MaxDegreeRule."""

    def __init__(self, params: Optional[RuleParams] = None):
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return METADATA

    def update(
        self, graph: Graph, i: int, x_i: float, neighbor_values: Sequence[float]
    ) -> float:
        epsilon = self.params.max_degree_epsilon(graph)
        total = 0.0
        for x_j in neighbor_values:
            total += x_j - x_i
        return x_i + epsilon * total

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        return MaxDegreeRule(self.params).weight_matrix(graph)


def max_degree_step(g: Graph, x: np.ndarray, params: Optional[RuleParams] = None) -> np.ndarray:
    return MaxDegreeRule(params).step(g, x)


def _as_state(graph: Graph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.n,):
        raise ArgumentError(f"State has shape {x.shape}, graph has {graph.n} agents")
    return x
