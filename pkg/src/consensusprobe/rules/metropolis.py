"""Metropolis averaging: x_i += sum_j epsilon_ij (x_j - x_i)."""

from typing import Optional, Sequence

import numpy as np

from ..core.graph import Graph
from ..core.plugin import LocalRule, RuleMetadata, StepRule
from .max_degree import _as_state
from .params import RuleParams

METADATA = RuleMetadata(
    name="metropolis",
    description="Edge weights epsilon_ij <= min(1/(d_i+1), 1/(d_j+1))",
    linear=True,
    local=True,
    smooth=True,
    variance_monotone=True,
    tags=("linear", "doubly-stochastic"),
)


class MetropolisRule(StepRule):
    def __init__(self, params: Optional[RuleParams] = None):
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return METADATA

    def step(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        x = _as_state(graph, x)
        src, dst = graph.arcs
        if len(src) == 0:
            return x.copy()
        weights = self.params.metropolis_weights(graph)
        # Arcs are sorted by (src, dst): each agent accumulates its
        # neighbors in ascending order, exactly like the per-agent form
        acc = np.bincount(src, weights=weights * (x[dst] - x[src]), minlength=graph.n)
        return x + acc

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        matrix = np.zeros((graph.n, graph.n))
        src, dst = graph.arcs
        if len(src):
            matrix[src, dst] = self.params.metropolis_weights(graph)
        matrix[np.diag_indices(graph.n)] = 1.0 - matrix.sum(axis=1)
        return matrix


class MetropolisLocalRule(LocalRule):
    """Per-agent form of the Metropolis rule; lifts to MetropolisRule."""

    def __init__(self, params: Optional[RuleParams] = None):
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return METADATA

    def update(
        self, graph: Graph, i: int, x_i: float, neighbor_values: Sequence[float]
    ) -> float:
        d_i = graph.degree(i)
        total = 0.0
        for j, x_j in zip(graph.neighbors(i), neighbor_values):
            weight = self.params.metropolis_weight_for(d_i, graph.degree(j))
            total += weight * (x_j - x_i)
        return x_i + total

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        return MetropolisRule(self.params).weight_matrix(graph)


def metropolis_step(g: Graph, x: np.ndarray, params: Optional[RuleParams] = None) -> np.ndarray:
    return MetropolisRule(params).step(g, x)
