"""
Rule plug-in architecture for consensusprobe.

Update rules come in two shapes: a LocalRule computes one agent's next
value from its own value and its neighbors' values, a StepRule maps the
whole state vector at once. `lift` turns the former into the latter,
and RuleRegistry resolves rule tags to StepRule instances.
"""

import importlib.util
import inspect
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ArgumentError, InvalidRuleError, UnsupportedRuleError
from .graph import Graph
from .spectral import LinearizationMatrix, consensus_fixed_point_check

logger = logging.getLogger(__name__)

NAMED_RULES = ("max-degree", "metropolis", "load-balancing")
CUSTOM_PREFIX = "custom:"

# Graphs every registered rule must keep at consensus
_PROBE_GRAPHS = (Graph.line(5), Graph.star(4), Graph.complete(4), Graph.edgeless(3))
_PROBE_VALUES = (-1.0e6, 0.0, 1.0, math.pi, 3.5)


@dataclass(frozen=True)
class RuleMetadata:
    """Declared properties of an update rule"""

    name: str
    description: str
    linear: bool = False
    local: bool = True
    smooth: bool = True
    variance_monotone: bool = False
    tags: Tuple[str, ...] = ()


class StepRule(ABC):
    """Whole-vector update x(t+1) = f(G(t), x(t))"""

    @abstractmethod
    def get_metadata(self) -> RuleMetadata:
        """Return rule metadata"""
        pass

    @abstractmethod
    def step(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        """
        Apply one synchronous round.

        Args:
            graph: Communication graph of the round
            x: State vector, index 0 holds agent 1

        Returns:
            New state vector; the input is left untouched
        """
        pass

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        """Matrix A with step(graph, x) = A @ x, for rules declared linear."""
        raise UnsupportedRuleError(
            f"Rule {self.name} is not declared linear and has no weight matrix"
        )

    @property
    def name(self) -> str:
        return self.get_metadata().name

    def __call__(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        return self.step(graph, x)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class LocalRule(ABC):
    """Per-agent update x_i(t+1) = f_i(x_i(t), neighbor values)"""

    @abstractmethod
    def get_metadata(self) -> RuleMetadata:
        """Return rule metadata"""
        pass

    @abstractmethod
    def update(
        self, graph: Graph, i: int, x_i: float, neighbor_values: Sequence[float]
    ) -> float:
        """
        Compute agent i's next value.

        Args:
            graph: Communication graph of the round
            i: Agent index (1-based)
            x_i: Agent i's current value
            neighbor_values: Values of graph.neighbors(i), in that order

        Returns:
            The agent's value for the next round
        """
        pass

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        raise UnsupportedRuleError(
            f"Rule {self.get_metadata().name} is not declared linear"
        )


class LiftedRule(StepRule):
    """Synchronous application of a LocalRule to every agent."""

    def __init__(self, rule: LocalRule):
        self.rule = rule

    def get_metadata(self) -> RuleMetadata:
        return self.rule.get_metadata()

    def step(self, graph: Graph, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if len(x) != graph.n:
            raise ArgumentError(f"State has {len(x)} entries, graph has {graph.n}")
        # Every agent reads the pre-step vector
        out = np.empty_like(x)
        for i in range(1, graph.n + 1):
            values = [float(x[j - 1]) for j in graph.neighbors(i)]
            out[i - 1] = self.rule.update(graph, i, float(x[i - 1]), values)
        return out

    def weight_matrix(self, graph: Graph) -> np.ndarray:
        return self.rule.weight_matrix(graph)


def lift(rule: LocalRule) -> StepRule:
    """Turn a per-agent rule into a synchronous whole-vector rule."""
    if not isinstance(rule, LocalRule):
        raise ArgumentError(f"lift expects a LocalRule, got {type(rule).__name__}")
    return LiftedRule(rule)


def matrix_of(rule: StepRule, g: Graph) -> LinearizationMatrix:
    """Exact linearization matrix of a rule declared linear."""
    if not rule.get_metadata().linear:
        raise UnsupportedRuleError(f"Rule {rule.name} is not declared linear")
    entries = np.asarray(rule.weight_matrix(g), dtype=float)
    return LinearizationMatrix(entries=entries, source="exact")


def step_map(rule: StepRule, graph: Graph) -> Callable[[np.ndarray], np.ndarray]:
    """The whole-vector map x -> rule.step(graph, x) for a fixed graph."""
    return lambda x: rule.step(graph, x)


class RuleRegistry:
    """Resolves rule tags and gates custom rules through registration checks"""

    def __init__(self, include_builtin: bool = True):
        self.custom: Dict[str, StepRule] = {}
        if include_builtin:
            from ..rules.custom import BUILTIN_CUSTOM_RULES

            for rule_id, factory in BUILTIN_CUSTOM_RULES.items():
                self.register(factory(), rule_id=rule_id, builtin=True)

    def register(
        self,
        rule: Union[LocalRule, StepRule],
        rule_id: Optional[str] = None,
        builtin: bool = False,
    ) -> StepRule:
        """
        Register a custom rule under `custom:<rule_id>`.

        Rules declared linear must agree with their weight matrix; every
        rule must keep consensus vectors fixed on the probe graphs.

        Raises:
            InvalidRuleError: If either check fails
        """
        step_rule = lift(rule) if isinstance(rule, LocalRule) else rule
        if not isinstance(step_rule, StepRule):
            raise InvalidRuleError(f"{type(rule).__name__} is not an update rule")

        metadata = step_rule.get_metadata()
        rule_id = rule_id or metadata.name
        if not isinstance(metadata.linear, bool):
            raise InvalidRuleError(f"Rule {rule_id} must declare linear=True/False")

        for graph in _PROBE_GRAPHS:
            if metadata.linear:
                self._check_linear_declaration(step_rule, graph, rule_id)
            if not consensus_fixed_point_check(
                step_map(step_rule, graph), _PROBE_VALUES, graph.n
            ):
                raise InvalidRuleError(
                    f"Rule {rule_id} moves a consensus vector on {graph.n} agents; "
                    f"convergent averaging rules must fix a*1"
                )

        self.custom[rule_id] = step_rule
        level = logging.DEBUG if builtin else logging.INFO
        logger.log(level, f"Registered rule: {CUSTOM_PREFIX}{rule_id}")
        return step_rule

    @staticmethod
    def _check_linear_declaration(rule: StepRule, graph: Graph, rule_id: str) -> None:
        rng = np.random.default_rng(graph.n)
        try:
            matrix = np.asarray(rule.weight_matrix(graph), dtype=float)
        except UnsupportedRuleError:
            raise InvalidRuleError(
                f"Rule {rule_id} is declared linear but has no weight matrix"
            )
        for _ in range(3):
            x = rng.standard_normal(graph.n)
            if not np.allclose(rule.step(graph, x), matrix @ x, rtol=1e-9, atol=1e-12):
                raise InvalidRuleError(
                    f"Rule {rule_id} is declared linear but its step disagrees "
                    f"with its weight matrix; declare it nonlinear"
                )

    def get(self, tag: str, params: Optional[Any] = None) -> StepRule:
        """
        Resolve a rule tag.

        Args:
            tag: `max-degree`, `metropolis`, `load-balancing` or `custom:<id>`
            params: RuleParams for the named rules (defaults when None)
        """
        from ..rules import build_named_rule

        if tag in NAMED_RULES:
            return build_named_rule(tag, params)
        if tag.startswith(CUSTOM_PREFIX):
            rule_id = tag[len(CUSTOM_PREFIX) :]
            if rule_id not in self.custom:
                raise ArgumentError(
                    f"Unknown custom rule: {rule_id}. "
                    f"Registered: {', '.join(sorted(self.custom)) or 'none'}"
                )
            return self.custom[rule_id]
        raise ArgumentError(
            f"Unknown rule tag: {tag}. Available: {', '.join(self.available())}"
        )

    def available(self) -> List[str]:
        return list(NAMED_RULES) + [
            f"{CUSTOM_PREFIX}{rule_id}" for rule_id in sorted(self.custom)
        ]

    def load_rules_from_directory(self, directory: Union[str, Path]) -> List[str]:
        """Load and register every rule class defined in a directory of modules"""
        directory = Path(directory)
        if not directory.is_dir():
            raise ArgumentError(f"Plugin directory not found: {directory}")

        loaded = []
        for file in sorted(directory.glob("*.py")):
            if file.name.startswith("_"):
                continue

            module_name = f"consensusprobe_plugin_{file.stem}"
            spec = importlib.util.spec_from_file_location(module_name, file)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)

            # Find all rule classes in the module
            for name, obj in inspect.getmembers(module, inspect.isclass):
                if obj.__module__ != module_name or inspect.isabstract(obj):
                    continue
                if issubclass(obj, (LocalRule, StepRule)):
                    rule = self.register(obj())
                    loaded.append(rule.name)
        return loaded
