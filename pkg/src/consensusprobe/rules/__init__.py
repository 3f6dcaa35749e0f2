"""
Named averaging rules for consensusprobe.
"""

from typing import Optional

from ..core.exceptions import ArgumentError
from ..core.plugin import StepRule
from .custom import CubicMeanRule, IdentityRule
from .load_balancing import LoadBalancingRule, load_balancing_step
from .max_degree import MaxDegreeLocalRule, MaxDegreeRule, max_degree_step
from .metropolis import MetropolisLocalRule, MetropolisRule, metropolis_step
from .params import RuleParams

# Registry of the named rules
NAMED_RULE_CLASSES = {
    "max-degree": MaxDegreeRule,
    "metropolis": MetropolisRule,
    "load-balancing": LoadBalancingRule,
}


def build_named_rule(tag: str, params: Optional[RuleParams] = None) -> StepRule:
    """
    Instantiate a named rule.

    Args:
        tag: 'max-degree', 'metropolis' or 'load-balancing'
        params: RuleParams, or None for the boundary policies

    Raises:
        ArgumentError: If tag is not a named rule
    """
    if tag not in NAMED_RULE_CLASSES:
        raise ArgumentError(
            f"Unknown named rule: {tag}. "
            f"Available: {', '.join(NAMED_RULE_CLASSES.keys())}"
        )
    return NAMED_RULE_CLASSES[tag](params)


__all__ = [
    "RuleParams",
    "MaxDegreeRule",
    "MaxDegreeLocalRule",
    "MetropolisRule",
    "MetropolisLocalRule",
    "LoadBalancingRule",
    "IdentityRule",
    "CubicMeanRule",
    "max_degree_step",
    "metropolis_step",
    "load_balancing_step",
    "build_named_rule",
]
