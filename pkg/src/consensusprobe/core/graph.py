"""
Graph model for consensusprobe.

Undirected communication graphs on agents 1..n, time-varying graph
sequences produced by named generators, and the window connectivity
condition every sequence is expected to satisfy.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from .exceptions import ArgumentError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

GENERATOR_KINDS = (
    "constant-line",
    "constant-ring",
    "constant-complete",
    "constant-star",
    "constant-edgeless",
    "periodic-list",
    "round-robin-single-edge",
    "seeded-random-spanning",
    "intermittent-line",
)

# Accepted parameter keys per generator kind
_KIND_PARAMS: Dict[str, Tuple[str, ...]] = {
    "constant-line": (),
    "constant-ring": (),
    "constant-complete": (),
    "constant-star": (),
    "constant-edgeless": (),
    "periodic-list": ("graphs", "directory"),
    "round-robin-single-edge": (),
    "seeded-random-spanning": ("extra_edge_prob",),
    "intermittent-line": ("period",),
}


@dataclass(frozen=True)
class Graph:
    """Undirected graph on agents 1..n without self-loops."""

    n: int
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self):
        if int(self.n) < 1:
            raise ArgumentError(f"Graph needs at least one agent, got n={self.n}")

        normalized = set()
        for edge in self.edges:
            i, j = (int(v) for v in edge)
            if i == j:
                raise ArgumentError(f"Self-loop at agent {i} is not allowed")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ArgumentError(f"Edge {{{i},{j}}} outside agents 1..{self.n}")
            normalized.add((min(i, j), max(i, j)))

        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def line(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, i + 1) for i in range(1, n)))

    @classmethod
    def ring(cls, n: int) -> "Graph":
        edges = {(i, i + 1) for i in range(1, n)}
        if n >= 3:
            edges.add((1, n))
        return cls(n, frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(
            n, frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))
        )

    @classmethod
    def star(cls, n: int) -> "Graph":
        return cls(n, frozenset((1, j) for j in range(2, n + 1)))

    @classmethod
    def edgeless(cls, n: int) -> "Graph":
        return cls(n, frozenset())

    @cached_property
    def _adjacency(self) -> Dict[int, Tuple[int, ...]]:
        adjacency: Dict[int, List[int]] = {i: [] for i in range(1, self.n + 1)}
        for i, j in self.edges:
            adjacency[i].append(j)
            adjacency[j].append(i)
        return {i: tuple(sorted(nbrs)) for i, nbrs in adjacency.items()}

    @cached_property
    def arcs(self) -> Tuple[np.ndarray, np.ndarray]:
        """Both orientations of every edge as 0-based (src, dst) arrays,
        sorted by src and then dst."""
        pairs = sorted(
            [(i - 1, j - 1) for i, j in self.edges]
            + [(j - 1, i - 1) for i, j in self.edges]
        )
        src = np.array([p[0] for p in pairs], dtype=np.intp)
        dst = np.array([p[1] for p in pairs], dtype=np.intp)
        return src, dst

    @cached_property
    def degrees(self) -> np.ndarray:
        """Degree of every agent, indexed 0..n-1."""
        return np.array(
            [len(self._adjacency[i]) for i in range(1, self.n + 1)], dtype=np.intp
        )

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def neighbors(self, i: int) -> List[int]:
        return neighbors(self, i)

    def degree(self, i: int) -> int:
        return len(neighbors(self, i))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.n + 1))
        graph.add_edges_from(self.edges)
        return graph


@dataclass(frozen=True)
class SequenceDescriptor:
    """Generator tag and parameters of a graph sequence."""

    kind: str
    n: int
    params: Dict[str, Any] = field(default_factory=dict, hash=False)
    seed: int = 0
    window_hint: Optional[int] = None

    def __str__(self) -> str:
        parts = [f"n={self.n}"]
        for key in sorted(self.params):
            value = self.params[key]
            if key == "graphs":
                value = f"<{len(value)} graphs>"
            parts.append(f"{key}={value}")
        if self.kind == "seeded-random-spanning":
            parts.append(f"seed={self.seed}")
        return f"{self.kind}({','.join(parts)})"


class GraphSequence:
    """Deterministic schedule t -> Graph on a fixed set of n agents."""

    def __init__(
        self,
        n: int,
        schedule: Callable[[int], Graph],
        descriptor: SequenceDescriptor,
    ):
        self.n = n
        self._schedule = schedule
        self.descriptor = descriptor

    def schedule(self, t: int) -> Graph:
        if t < 0:
            raise ArgumentError(f"Round index must be non-negative, got {t}")
        graph = self._schedule(int(t))
        if graph.n != self.n:
            raise ArgumentError(
                f"Schedule produced a graph on {graph.n} agents, expected {self.n}"
            )
        return graph

    __call__ = schedule

    @property
    def is_constant(self) -> bool:
        return self.descriptor.kind.startswith("constant-")

    @property
    def window_hint(self) -> Optional[int]:
        return self.descriptor.window_hint

    def __repr__(self) -> str:
        return f"GraphSequence({self.descriptor})"


def neighbors(g: Graph, i: int) -> List[int]:
    """Neighbors of agent i in ascending index order."""
    if not 1 <= i <= g.n:
        raise ArgumentError(f"Agent index {i} outside 1..{g.n}")
    return list(g._adjacency[i])


def is_connected(g: Graph) -> bool:
    """True iff the graph has exactly one connected component."""
    if g.n == 1:
        return True
    if len(g.edges) < g.n - 1:
        return False
    return nx.is_connected(g.to_networkx())


def union_graph(seq: GraphSequence, t0: int, t1: int) -> Graph:
    """Graph whose edge set is the union of E(s) for s in [t0, t1]."""
    if t0 > t1:
        raise ArgumentError(f"Empty window: t0={t0} > t1={t1}")
    if t0 < 0:
        raise ArgumentError(f"Round index must be non-negative, got {t0}")

    if seq.is_constant:
        return seq.schedule(t0)

    edges = set()
    for s in range(t0, t1 + 1):
        edges.update(seq.schedule(s).edges)
    return Graph(seq.n, frozenset(edges))


def first_failing_window(seq: GraphSequence, B: int, horizon: int) -> Optional[int]:
    """
    Index k of the first window [kB, (k+1)B] whose union is disconnected.

    Windows include both endpoints, so consecutive windows share a round.
    Only windows with (k+1)B <= horizon are examined.

    Returns:
        The failing k, or None when every window is connected
    """
    if B < 1:
        raise ArgumentError(f"Window length must be at least 1, got B={B}")
    if horizon < B:
        raise ArgumentError(f"Horizon {horizon} shorter than window length {B}")

    k = 0
    while (k + 1) * B <= horizon:
        window = union_graph(seq, k * B, (k + 1) * B)
        if not is_connected(window):
            logger.debug(f"Window k={k} [{k * B}, {(k + 1) * B}] is disconnected")
            return k
        k += 1
    return None


def validate_b_connectivity(seq: GraphSequence, B: int, horizon: int) -> bool:
    """True iff every window of the sequence within the horizon is connected."""
    return first_failing_window(seq, B, horizon) is None


def make_sequence(
    kind: str,
    n: int,
    params: Optional[Dict[str, Any]] = None,
    seed: int = 0,
) -> GraphSequence:
    """
    Build a deterministic graph sequence from a generator tag.

    Args:
        kind: One of GENERATOR_KINDS
        n: Number of agents
        params: Generator parameters (see _KIND_PARAMS)
        seed: Seed for randomized generators

    Returns:
        GraphSequence whose schedule is a pure function of (seed, t)
    """
    params = dict(params or {})
    if kind not in _KIND_PARAMS:
        raise ArgumentError(
            f"Unknown sequence kind: {kind}. Available: {', '.join(GENERATOR_KINDS)}"
        )
    if n < 1:
        raise ArgumentError(f"Sequence needs at least one agent, got n={n}")
    unknown = set(params) - set(_KIND_PARAMS[kind])
    if unknown:
        raise ArgumentError(
            f"Parameters {sorted(unknown)} not accepted by generator {kind}"
        )
    if seed < 0:
        raise ArgumentError(f"Seed must be non-negative, got {seed}")

    if kind.startswith("constant-"):
        builder = {
            "constant-line": Graph.line,
            "constant-ring": Graph.ring,
            "constant-complete": Graph.complete,
            "constant-star": Graph.star,
            "constant-edgeless": Graph.edgeless,
        }[kind]
        graph = builder(n)
        hint = 1 if is_connected(graph) else None
        descriptor = SequenceDescriptor(kind, n, params, seed, hint)
        return GraphSequence(n, lambda t: graph, descriptor)

    if kind == "periodic-list":
        graphs = _periodic_graphs(n, params)
        period = len(graphs)
        whole = Graph(n, frozenset().union(*(g.edges for g in graphs)))
        hint = period if is_connected(whole) else None
        descriptor = SequenceDescriptor(kind, n, params, seed, hint)
        return GraphSequence(n, lambda t: graphs[t % period], descriptor)

    if kind == "round-robin-single-edge":
        if n < 2:
            raise ArgumentError("round-robin-single-edge needs at least two agents")
        edges = [Graph(n, frozenset({(k, k + 1)})) for k in range(1, n)]
        descriptor = SequenceDescriptor(kind, n, params, seed, n - 1)
        return GraphSequence(n, lambda t: edges[t % (n - 1)], descriptor)

    if kind == "seeded-random-spanning":
        prob = float(params.get("extra_edge_prob", 0.0))
        if not 0.0 <= prob <= 1.0:
            raise ArgumentError(f"extra_edge_prob must lie in [0, 1], got {prob}")
        descriptor = SequenceDescriptor(kind, n, params, seed, 1)
        return GraphSequence(
            n, lambda t: _random_spanning_graph(n, seed, t, prob), descriptor
        )

    # intermittent-line
    period = int(params.get("period", 1))
    if period < 1:
        raise ArgumentError(f"period must be at least 1, got {period}")
    line, empty = Graph.line(n), Graph.edgeless(n)
    descriptor = SequenceDescriptor(kind, n, params, seed, period)
    return GraphSequence(
        n, lambda t: line if t % period == 0 else empty, descriptor
    )


def _periodic_graphs(n: int, params: Dict[str, Any]) -> List[Graph]:
    if "graphs" in params and "directory" in params:
        raise ArgumentError("periodic-list takes either graphs or directory, not both")
    if "directory" in params:
        graphs = read_sequence_dir(params["directory"])
    else:
        graphs = list(params.get("graphs", []))
    if not graphs:
        raise ArgumentError("periodic-list needs at least one graph")
    for graph in graphs:
        if graph.n != n:
            raise ArgumentError(
                f"periodic-list graph has {graph.n} agents, expected {n}"
            )
    return graphs


@lru_cache(maxsize=4096)
def _random_spanning_graph(n: int, seed: int, t: int, extra_edge_prob: float) -> Graph:
    rng = np.random.default_rng([seed, t])
    order = rng.permutation(n) + 1
    edges = set()
    # Random recursive tree over a random labelling: always spanning
    for k in range(1, n):
        parent = int(order[rng.integers(0, k)])
        edges.add((int(order[k]), parent))
    if extra_edge_prob > 0.0:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if rng.random() < extra_edge_prob:
                    edges.add((i, j))
    return Graph(n, frozenset(edges))


# ---------------------------------------------------------------------------
# Text format: "n <count>" followed by one "e <i> <j>" line per edge
# ---------------------------------------------------------------------------


def format_graph_text(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"e {i} {j}" for i, j in sorted(g.edges))
    return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> Graph:
    n: Optional[int] = None
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            if fields[0] == "n" and len(fields) == 2:
                n = int(fields[1])
            elif fields[0] == "e" and len(fields) == 3:
                edges.add((int(fields[1]), int(fields[2])))
            else:
                raise ValueError(line)
        except ValueError:
            raise ArgumentError(f"Malformed graph line {lineno}: {raw!r}")
    if n is None:
        raise ArgumentError("Graph text lacks an 'n <count>' line")
    return Graph(n, frozenset(edges))


def read_graph(path: Union[str, Path]) -> Graph:
    return parse_graph_text(Path(path).read_text())


def write_graph(g: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_graph_text(g))


def read_sequence_dir(directory: Union[str, Path]) -> List[Graph]:
    """
    Read a periodic sequence stored as numbered graph files.

    The directory holds `0.graph`, `1.graph`, ... and a `period` file
    whose content is `period <P>` (or just `<P>`); P must equal the
    number of graph files.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ArgumentError(f"Sequence directory not found: {directory}")

    period_file = directory / "period"
    if not period_file.exists():
        raise ArgumentError(f"Sequence directory {directory} lacks a period file")
    tokens = period_file.read_text().split()
    try:
        period = int(tokens[-1])
    except (IndexError, ValueError):
        raise ArgumentError(f"Malformed period declaration in {period_file}")

    files = list(directory.glob("*.graph"))
    unnumbered = sorted(p.name for p in files if not p.stem.isdigit())
    if unnumbered:
        raise ArgumentError(
            f"Graph files in {directory} must be numbered, found {', '.join(unnumbered)}"
        )
    files.sort(key=lambda p: int(p.stem))
    if len(files) != period:
        raise ArgumentError(
            f"Period {period} declared but {len(files)} graph files found"
        )
    return [read_graph(path) for path in files]


def write_sequence_dir(graphs: Iterable[Graph], directory: Union[str, Path]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    graphs = list(graphs)
    for index, graph in enumerate(graphs):
        write_graph(graph, directory / f"{index}.graph")
    (directory / "period").write_text(f"period {len(graphs)}\n")
