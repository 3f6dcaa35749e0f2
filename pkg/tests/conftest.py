"""Shared fixtures for the consensusprobe test suite."""

import numpy as np
import pytest
from click.testing import CliRunner

from consensusprobe.core.graph import Graph, make_sequence
from consensusprobe.core.plugin import RuleRegistry
from consensusprobe.rules import LoadBalancingRule, MaxDegreeRule, MetropolisRule


@pytest.fixture
def line3():
    return Graph.line(3)


@pytest.fixture
def metropolis():
    return MetropolisRule()


@pytest.fixture
def max_degree():
    return MaxDegreeRule()


@pytest.fixture
def load_balancing():
    return LoadBalancingRule()


@pytest.fixture(params=["max-degree", "metropolis", "load-balancing"])
def named_rule(request):
    return RuleRegistry().get(request.param)


@pytest.fixture
def registry():
    return RuleRegistry()


@pytest.fixture
def line_sequence():
    def build(n):
        return make_sequence("constant-line", n)

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def runner():
    return CliRunner()


PLUGIN_SOURCE = '''
from consensusprobe.core.plugin import LocalRule, RuleMetadata


class HalfMetropolis(LocalRule):
    """Metropolis weights halved."""

    def get_metadata(self):
        return RuleMetadata(name="half-metropolis", description="lazy Metropolis")

    def update(self, graph, i, x_i, neighbor_values):
        d_i = graph.degree(i)
        total = 0.0
        for j, x_j in zip(graph.neighbors(i), neighbor_values):
            total += 0.5 * min(1.0 / (d_i + 1), 1.0 / (graph.degree(j) + 1)) * (x_j - x_i)
        return x_i + total
'''

DRIFTING_PLUGIN_SOURCE = '''
from consensusprobe.core.plugin import LocalRule, RuleMetadata


class Drift(LocalRule):
    def get_metadata(self):
        return RuleMetadata(name="drift", description="moves consensus")

    def update(self, graph, i, x_i, neighbor_values):
        return x_i + 1.0
'''

EXPLODING_PLUGIN_SOURCE = '''
from consensusprobe.core.plugin import LocalRule, RuleMetadata


class Explode(LocalRule):
    def get_metadata(self):
        return RuleMetadata(name="explode", description="overflows off consensus", smooth=False)

    def update(self, graph, i, x_i, neighbor_values):
        total = 0.0
        for x_j in neighbor_values:
            total += (x_j - x_i) * 1e308 * 10.0
        return x_i + total
'''


@pytest.fixture
def plugin_dir(tmp_path):
    directory = tmp_path / "plugins"
    directory.mkdir()
    (directory / "half_metropolis.py").write_text(PLUGIN_SOURCE)
    return directory


@pytest.fixture
def drifting_plugin_dir(tmp_path):
    directory = tmp_path / "bad_plugins"
    directory.mkdir()
    (directory / "drift.py").write_text(DRIFTING_PLUGIN_SOURCE)
    return directory


@pytest.fixture
def exploding_plugin_dir(tmp_path):
    directory = tmp_path / "exploding_plugins"
    directory.mkdir()
    (directory / "explode.py").write_text(EXPLODING_PLUGIN_SOURCE)
    return directory
