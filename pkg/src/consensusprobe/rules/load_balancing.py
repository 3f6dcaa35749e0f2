"""
Load-balancing averaging.

Each agent selects the neighbor with the largest value above its own and
the neighbor with the smallest value below its own. A pair that selected
each other moves a third of their difference. Whether a pair forms
depends on second neighbors, so the rule is not local.
"""

from typing import Optional, Tuple

import numpy as np

from ..core.graph import Graph
from ..core.plugin import RuleMetadata, StepRule
from .max_degree import _as_state
from .params import RuleParams

METADATA = RuleMetadata(
    name="load-balancing",
    description="Mutual heaviest/lightest neighbor pairs exchange a_ij = 1/3",
    linear=False,
    local=False,
    smooth=False,
    variance_monotone=True,
    tags=("nonlinear", "matching"),
)

NO_SELECTION = -1


class LoadBalancingRule(StepRule):
    def __init__(self, params: Optional[RuleParams] = None):
        self.params = params or RuleParams()

    def get_metadata(self) -> RuleMetadata:
        return METADATA

    def select(self, graph: Graph, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Selected neighbors of every agent.

        Returns:
            (up, down): 0-based index of the heaviest neighbor above and of
            the lightest neighbor below each agent, NO_SELECTION when empty
        """
        x = _as_state(graph, x)
        up = np.full(graph.n, NO_SELECTION, dtype=np.intp)
        down = np.full(graph.n, NO_SELECTION, dtype=np.intp)
        src, dst = graph.arcs
        if len(src) == 0:
            return up, down

        diff = x[dst] - x[src]
        if self.params.strict_selection:
            above, below = diff > 0, diff < 0
        else:
            above, below = diff >= 0, diff <= 0
        tie_key = dst if self.params.tie_break == "lowest-index" else -dst

        # lexsort: last key is primary -> by agent, then value, then tie key
        for mask, slot, value_key in ((above, up, -x[dst]), (below, down, x[dst])):
            idx = np.nonzero(mask)[0]
            if len(idx) == 0:
                continue
            ordered = idx[np.lexsort((tie_key[idx], value_key[idx], src[idx]))]
            _, first = np.unique(src[ordered], return_index=True)
            chosen = ordered[first]
            slot[src[chosen]] = dst[chosen]
        return up, down

    def mutual_pairs(self, graph: Graph, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """0-based (lower, upper) agents of every pair that selected each other."""
        up, down = self.select(graph, x)
        lower = np.nonzero(up != NO_SELECTION)[0]
        upper = up[lower]
        mutual = down[upper] == lower
        # Non-strict selection can pair equal agents; those pairs move nothing
        return lower[mutual], upper[mutual]

    def coefficients(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        """The symmetric matrix of a_ij used by the step at state x."""
        lower, upper = self.mutual_pairs(graph, x)
        matrix = np.zeros((graph.n, graph.n))
        matrix[lower, upper] = self.params.mutual_weight
        matrix[upper, lower] = self.params.mutual_weight
        return matrix

    def step(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        x = _as_state(graph, x)
        lower, upper = self.mutual_pairs(graph, x)
        out = x.copy()
        if len(lower) == 0:
            return out
        delta = self.params.mutual_weight * (x[upper] - x[lower])
        np.add.at(out, lower, delta)
        np.add.at(out, upper, -delta)
        return out


def load_balancing_step(
    g: Graph, x: np.ndarray, params: Optional[RuleParams] = None
) -> np.ndarray:
    return LoadBalancingRule(params).step(g, x)
