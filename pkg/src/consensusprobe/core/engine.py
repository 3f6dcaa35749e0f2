"""
Simulation engine for consensusprobe.

Runs an update rule along a graph sequence, evaluates the sample
variance against the initial mean, and measures convergence times:
the first round after which the variance stays at or below
epsilon * V(x(0)).
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    ArgumentError,
    DegenerateInputError,
    NumericalError,
    UnsupportedRuleError,
)
from .graph import GraphSequence
from .plugin import StepRule, matrix_of, step_map
from .spectral import (
    DEFAULT_PROBE_STEP,
    eigen_decompose,
    numerical_jacobian,
    slowest_mode,
    spectral_certificate,
)

logger = logging.getLogger(__name__)

# Full state history is kept while n * (t_max + 1) stays within this budget
MAX_STORED_VALUES = 10**8


@dataclass
class Trajectory:
    """State history x(0..t_max) of one run."""

    rule: str
    descriptor: str
    seed: Optional[int]
    n: int
    t_max: int
    reference_mean: float
    variance: np.ndarray
    states: Optional[np.ndarray] = None
    checkpoints: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def is_full(self) -> bool:
        return self.states is not None

    @property
    def final_state(self) -> np.ndarray:
        if self.states is not None:
            return self.states[-1]
        return self.checkpoints[self.t_max]

    def stored_states(self) -> Iterator[Tuple[int, np.ndarray]]:
        """Every stored (t, x(t)): all rounds, or the checkpoints when thinned."""
        if self.states is not None:
            yield from enumerate(self.states)
        else:
            yield from sorted(self.checkpoints.items())

    def distances(self, p: float = 2.0) -> Dict[int, float]:
        """||x(t) - m1||_p for every stored state, m the initial mean."""
        return {
            t: p_norm_distance(x, self.reference_mean, p)
            for t, x in self.stored_states()
        }


@dataclass
class ConvergenceReport:
    """Measured convergence round T for one rule, sequence and start."""

    T: Optional[int]
    epsilon: float
    horizon: int
    certified: bool
    V0: float
    V_at_T: Optional[float]
    rounds: int
    rule: str = ""
    descriptor: str = ""
    n: int = 0
    strategy: str = "given"
    x0: Optional[np.ndarray] = None
    lambda2: Optional[float] = None

    @property
    def reached(self) -> bool:
        return self.T is not None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "T": self.T if self.T is not None else "not-reached",
            "certified": self.certified,
            "epsilon": self.epsilon,
            "horizon": self.horizon,
            "rounds": self.rounds,
            "V0": self.V0,
            "V_at_T": self.V_at_T,
            "rule": self.rule,
            "sequence": self.descriptor,
            "n": self.n,
            "strategy": self.strategy,
        }
        if self.lambda2 is not None:
            data["lambda2"] = self.lambda2
        return data


@dataclass(frozen=True)
class SpectralInit:
    """
    Start from the slowest mode of the rule's linearization.

    Rules not declared linear start from nonlinear_scale times the unit
    mode, close enough to consensus for the linearization to govern.
    """

    nonlinear_scale: float = DEFAULT_PROBE_STEP

    def describe(self) -> str:
        return "spectral"


@dataclass(frozen=True)
class RandomRestarts:
    """k seeded standard-normal starts."""

    k: int
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ArgumentError(f"random-restarts needs k >= 1, got {self.k}")

    def describe(self) -> str:
        return f"random:{self.k}"


@dataclass(frozen=True)
class GivenInit:
    """An explicit initial vector, from a file or the command line."""

    values: Tuple[float, ...]
    source: str = "vector"

    def describe(self) -> str:
        return self.source


InitStrategy = Union[SpectralInit, RandomRestarts, GivenInit]


def parse_init(text: str, seed: int = 0) -> InitStrategy:
    """
    Parse `spectral`, `random:<k>`, `file:<path>` or `vector:<v1,v2,...>`.
    """
    if text == "spectral":
        return SpectralInit()
    kind, sep, arg = text.partition(":")
    if not sep:
        raise ArgumentError(f"Unknown init strategy: {text}")
    if kind == "random":
        try:
            return RandomRestarts(int(arg), seed)
        except ValueError:
            raise ArgumentError(f"random:<k> needs an integer k, got {arg!r}")
    if kind == "file":
        path = Path(arg)
        if not path.exists():
            raise ArgumentError(f"Initial vector file not found: {path}")
        return GivenInit(_parse_values(path.read_text()), source=f"file:{path}")
    if kind == "vector":
        return GivenInit(_parse_values(arg))
    raise ArgumentError(f"Unknown init strategy: {text}")


def _parse_values(text: str) -> Tuple[float, ...]:
    tokens = text.replace(",", " ").split()
    try:
        values = tuple(float(token) for token in tokens)
    except ValueError as e:
        raise ArgumentError(f"Malformed initial vector: {e}")
    if not values:
        raise ArgumentError("Initial vector is empty")
    return values


def random_initial_state(n: int, seed: int, index: int = 0) -> np.ndarray:
    """The index-th start of RandomRestarts(k, seed)."""
    return np.random.default_rng([seed, index]).standard_normal(n)


def default_horizon(n: int, B: int, epsilon: float) -> int:
    """max(1000, ceil(50 n^2 B ln(1/epsilon)))."""
    return max(1000, math.ceil(50 * n**2 * B * math.log(1.0 / epsilon)))


def sample_variance(x: np.ndarray, reference_mean: Optional[float] = None) -> float:
    """Sum of squared deviations from the reference mean (default: mean of x)."""
    x = np.asarray(x, dtype=float)
    if len(x) < 1:
        raise ArgumentError("Variance of an empty vector")
    m = float(np.mean(x)) if reference_mean is None else reference_mean
    return float(np.sum((x - m) ** 2))


def p_norm_distance(x: np.ndarray, reference_mean: float, p: float) -> float:
    """||x - m1||_p for p >= 1 or p = inf."""
    if not (p >= 1 or p == math.inf):
        raise ArgumentError(f"Norm order must be >= 1 or inf, got p={p}")
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - reference_mean, ord=p))


def iterate(
    rule: StepRule, seq: GraphSequence, x0: np.ndarray
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (t, x(t)) for t = 1, 2, ... along the sequence."""
    x = np.asarray(x0, dtype=float)
    t = 0
    while True:
        x = rule.step(seq.schedule(t), x)
        t += 1
        if not np.all(np.isfinite(x)):
            bad = int(np.nonzero(~np.isfinite(x))[0][0]) + 1
            raise NumericalError(
                f"Rule {rule.name} produced a non-finite value at round {t}, agent {bad}",
                index=bad,
            )
        yield t, x


def _check_start(seq: GraphSequence, x0: np.ndarray) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (seq.n,):
        raise ArgumentError(f"Initial vector has shape {x0.shape}, sequence has {seq.n} agents")
    if not np.all(np.isfinite(x0)):
        raise ArgumentError("Initial vector has non-finite entries")
    return x0


def run(
    rule: StepRule,
    seq: GraphSequence,
    x0: np.ndarray,
    t_max: int,
    seed: Optional[int] = None,
    max_stored_values: int = MAX_STORED_VALUES,
) -> Trajectory:
    """
    Simulate t_max synchronous rounds.

    The full history is stored while n * (t_max + 1) <= max_stored_values;
    beyond that only the variance series and checkpoints every n rounds
    (plus the final round) are kept.
    """
    x0 = _check_start(seq, x0)
    if t_max < 0:
        raise ArgumentError(f"t_max must be non-negative, got {t_max}")

    m = float(np.mean(x0))
    full = seq.n * (t_max + 1) <= max_stored_values
    variance = np.empty(t_max + 1)
    variance[0] = sample_variance(x0, m)
    states = np.empty((t_max + 1, seq.n)) if full else None
    checkpoints: Dict[int, np.ndarray] = {}
    if full:
        states[0] = x0
    else:
        checkpoints[0] = x0.copy()
        logger.info(
            f"Trajectory of {seq.n * (t_max + 1):,} values exceeds the storage "
            f"budget; keeping checkpoints every {seq.n} rounds"
        )

    logger.debug(f"Running {rule.name} on {seq.descriptor} for {t_max} rounds")
    if t_max > 0:
        for t, x in iterate(rule, seq, x0):
            variance[t] = sample_variance(x, m)
            if full:
                states[t] = x
            elif t % seq.n == 0 or t == t_max:
                checkpoints[t] = x.copy()
            if t == t_max:
                break

    return Trajectory(
        rule=rule.name,
        descriptor=str(seq.descriptor),
        seed=seed,
        n=seq.n,
        t_max=t_max,
        reference_mean=m,
        variance=variance,
        states=states,
        checkpoints=checkpoints,
    )


def convergence_time(
    rule: StepRule,
    seq: GraphSequence,
    x0: np.ndarray,
    epsilon: float,
    t_max: Optional[int] = None,
    stop_when_certified: bool = True,
) -> ConvergenceReport:
    """
    Measure T: the smallest t with V(x(s)) <= epsilon * V(x(0)) for all
    recorded s in [t, t_max].

    Rules carrying a variance-monotone guarantee stop at the first
    crossing, which is then permanent. Other rules run the full horizon
    and T is one past the last round above the threshold.

    Raises:
        DegenerateInputError: If x0 is already at consensus
    """
    x0 = _check_start(seq, x0)
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"Shrink factor must lie in (0, 1), got {epsilon}")
    m = float(np.mean(x0))
    v0 = sample_variance(x0, m)
    if v0 == 0.0 or np.all(x0 == x0[0]):
        raise DegenerateInputError(
            "Initial vector is at consensus; convergence time is undefined"
        )
    if t_max is None:
        t_max = default_horizon(seq.n, seq.window_hint or 1, epsilon)
    if t_max < 0:
        raise ArgumentError(f"t_max must be non-negative, got {t_max}")

    metadata = rule.get_metadata()
    threshold = epsilon * v0
    early_stop = stop_when_certified and metadata.variance_monotone
    series = [v0]
    last_above = 0
    stopped = False

    if t_max > 0:
        for t, x in iterate(rule, seq, x0):
            v = sample_variance(x, m)
            series.append(v)
            if v > threshold:
                last_above = t
            elif early_stop:
                stopped = True
                break
            if t == t_max:
                break

    rounds = len(series) - 1
    reached = stopped or series[-1] <= threshold
    T = last_above + 1 if reached else None

    certified = False
    if stopped:
        certified = True
        logger.debug(f"{rule.name}: permanent crossing at round {T}, stopping")
    elif reached:
        tail = np.asarray(series[T:])
        monotone = bool(np.all(np.diff(tail) <= 1e-12 * v0))
        certified = (monotone and metadata.variance_monotone) or _spectral_certifies(
            rule, seq
        )

    report = ConvergenceReport(
        T=T,
        epsilon=epsilon,
        horizon=t_max,
        certified=certified,
        V0=v0,
        V_at_T=series[T] if T is not None else None,
        rounds=rounds,
        rule=rule.name,
        descriptor=str(seq.descriptor),
        n=seq.n,
        x0=x0,
    )
    logger.info(
        f"{rule.name} on {seq.descriptor}: T={report.to_dict()['T']} "
        f"(certified={certified}, rounds={rounds})"
    )
    return report


def _spectral_certifies(rule: StepRule, seq: GraphSequence) -> bool:
    if not (seq.is_constant and rule.get_metadata().linear):
        return False
    return spectral_certificate(matrix_of(rule, seq.schedule(0)))


def spectral_initial_state(rule: StepRule, seq: GraphSequence) -> Tuple[float, np.ndarray]:
    """
    Slowest mode (eigenvalue, unit eigenvector) of the rule on schedule(0).

    Linear rules use their exact matrix, smooth nonlinear rules the
    numerical Jacobian at the origin.

    Raises:
        UnsupportedRuleError: For rules with no linearization
    """
    metadata = rule.get_metadata()
    graph = seq.schedule(0)
    if metadata.linear:
        matrix = matrix_of(rule, graph)
    elif metadata.smooth and metadata.local:
        matrix = numerical_jacobian(step_map(rule, graph), np.zeros(seq.n))
    else:
        raise UnsupportedRuleError(
            f"Rule {rule.name} has no linearization; use random restarts"
        )
    return slowest_mode(eigen_decompose(matrix))


def worst_case_convergence_time(
    rule: StepRule,
    seq: GraphSequence,
    epsilon: float,
    strategy: InitStrategy,
    t_max: Optional[int] = None,
    jobs: int = 1,
) -> ConvergenceReport:
    """
    Largest measured T over the strategy's initial vectors.

    Unreached starts dominate reached ones; ties keep the earliest start.
    The achieving x0 is recorded on the report.
    """
    if isinstance(strategy, SpectralInit):
        lambda2, v = spectral_initial_state(rule, seq)
        if not rule.get_metadata().linear:
            v = strategy.nonlinear_scale * v
        report = convergence_time(rule, seq, v, epsilon, t_max)
        report.strategy = strategy.describe()
        report.lambda2 = lambda2
        return report

    if isinstance(strategy, GivenInit):
        report = convergence_time(rule, seq, np.array(strategy.values), epsilon, t_max)
        report.strategy = strategy.describe()
        return report

    starts = [random_initial_state(seq.n, strategy.seed, k) for k in range(strategy.k)]
    reports = _run_starts(rule, seq, starts, epsilon, t_max, jobs)

    worst = reports[0]
    for report in reports[1:]:
        if _slower(report, worst):
            worst = report
    worst.strategy = strategy.describe()
    return worst


def _slower(a: ConvergenceReport, b: ConvergenceReport) -> bool:
    if b.T is None:
        return False
    return a.T is None or a.T > b.T


def _run_starts(
    rule: StepRule,
    seq: GraphSequence,
    starts: Sequence[np.ndarray],
    epsilon: float,
    t_max: Optional[int],
    jobs: int,
) -> List[ConvergenceReport]:
    """Run independent starts, sequentially or in a thread pool, in start order."""
    if jobs <= 1 or len(starts) == 1:
        return [convergence_time(rule, seq, x0, epsilon, t_max) for x0 in starts]

    reports: List[Optional[ConvergenceReport]] = [None] * len(starts)
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
        future_to_index = {
            executor.submit(convergence_time, rule, seq, x0, epsilon, t_max): index
            for index, x0 in enumerate(starts)
        }
        for future in concurrent.futures.as_completed(future_to_index):
            index = future_to_index[future]
            reports[index] = future.result()
            logger.debug(f"Restart {index} finished: T={reports[index].T}")
    return reports


def norm_convergence_time(
    trajectory: Trajectory, epsilon: float, p: float = 2.0
) -> Optional[int]:
    """
    First stored round after which ||x(t) - m1||_p stays at or below
    epsilon * ||x(0) - m1||_p, or None when the last stored state is above.
    """
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"Shrink factor must lie in (0, 1), got {epsilon}")
    distances = trajectory.distances(p)
    rounds = sorted(distances)
    threshold = epsilon * distances[0]
    if distances[rounds[-1]] > threshold:
        return None
    T = 0
    for t in rounds:
        if distances[t] > threshold:
            T = t + 1
    return T


def norm_sandwich_holds(trajectory: Trajectory) -> bool:
    """||.||_inf <= ||.||_2 <= sqrt(n) ||.||_inf on every stored state."""
    root_n = math.sqrt(trajectory.n)
    for _, x in trajectory.stored_states():
        deviation = x - trajectory.reference_mean
        inf_norm = float(np.max(np.abs(deviation)))
        two_norm = float(np.linalg.norm(deviation))
        slack = 1e-12 * two_norm
        if not (inf_norm <= two_norm + slack and two_norm <= root_n * inf_norm + slack):
            return False
    return True
