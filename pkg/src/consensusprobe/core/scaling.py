"""
Convergence-time scaling studies.

Measures T(n, epsilon) over a list of n, fits T ~ n^slope on log-log
axes and audits every point against the quadratic lower bound.
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .engine import InitStrategy, worst_case_convergence_time
from .exceptions import ArgumentError, ScalingAbortedError
from .graph import GraphSequence
from .plugin import StepRule
from .spectral import lower_bound_exact, lower_bound_value

logger = logging.getLogger(__name__)


@dataclass
class ScalingPoint:
    """One measured (n, T) pair and its audit against the lower bound."""

    n: int
    T: Optional[int]
    B: int
    epsilon: float
    lower_bound: Optional[float] = None
    lower_bound_exact: Optional[float] = None
    lambda2: Optional[float] = None

    def __post_init__(self):
        if self.n >= 3 and self.lower_bound is None:
            self.lower_bound = lower_bound_value(self.n, self.epsilon)
            self.lower_bound_exact = lower_bound_exact(self.n, self.epsilon)

    @property
    def audit(self) -> Optional[bool]:
        """Whether T clears the lower bound; None below n = 3."""
        if self.lower_bound is None:
            return None
        return self.T is not None and self.T >= self.lower_bound

    @property
    def upper_ratio(self) -> Optional[float]:
        """T / (n^2 B ln(1/epsilon))."""
        if self.T is None:
            return None
        return self.T / (self.n**2 * self.B * math.log(1.0 / self.epsilon))


@dataclass
class ScalingFitReport:
    """Log-log fit of T against n with per-point lower-bound audits."""

    points: List[ScalingPoint]
    slope: float
    intercept: float
    r2: float
    c_hat: float
    excluded: List[int] = field(default_factory=list)

    @property
    def audit_passed(self) -> bool:
        return all(p.audit is not False for p in self.points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "c_hat": self.c_hat,
            "audit": self.audit_passed,
            "points": len(self.points),
            "excluded": ",".join(str(n) for n in self.excluded) or "none",
        }


def fit_scaling(points: Sequence[ScalingPoint]) -> ScalingFitReport:
    """
    Ordinary least squares of ln T on ln n.

    Points with T = 0 are excluded (and listed); C-hat is the largest
    T / (n^2 B ln(1/epsilon)) over the points.

    Raises:
        ArgumentError: With fewer than two usable points, or an unreached point
    """
    points = sorted(points, key=lambda p: p.n)
    if any(p.T is None for p in points):
        raise ArgumentError("Cannot fit a sweep with unreached points")

    usable = [p for p in points if p.T >= 1]
    excluded = [p.n for p in points if p.T == 0]
    if len({p.n for p in usable}) < 2:
        raise ArgumentError("Scaling fit needs at least two distinct n with T >= 1")

    log_n = np.log([p.n for p in usable])
    log_t = np.log([p.T for p in usable])
    fit = stats.linregress(log_n, log_t)
    c_hat = max(p.upper_ratio for p in points)

    report = ScalingFitReport(
        points=list(points),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r2=float(fit.rvalue**2),
        c_hat=float(c_hat),
        excluded=excluded,
    )
    logger.info(
        f"Fitted T ~ n^{report.slope:.4f} (r2={report.r2:.6f}, C-hat={report.c_hat:.4g})"
    )
    return report


def measure_scaling(
    rule_for: Callable[[int], StepRule],
    sequence_for: Callable[[int], GraphSequence],
    n_list: Sequence[int],
    epsilon: float,
    strategy: InitStrategy,
    B: Optional[int] = None,
    t_max: Optional[int] = None,
    jobs: int = 1,
    on_point: Optional[Callable[[ScalingPoint], None]] = None,
) -> List[ScalingPoint]:
    """
    Measure the worst-case T for every n.

    Points run concurrently up to `jobs`; the returned list is sorted by n.

    Raises:
        ScalingAbortedError: If a point is not reached; carries every
            point measured so far (sorted by n)
    """
    if len(n_list) < 1:
        raise ArgumentError("Scaling sweep needs at least one n")

    def measure(n: int) -> ScalingPoint:
        seq = sequence_for(n)
        window = B or seq.window_hint or 1
        report = worst_case_convergence_time(rule_for(n), seq, epsilon, strategy, t_max)
        return ScalingPoint(n=n, T=report.T, B=window, epsilon=epsilon, lambda2=report.lambda2)

    points: List[ScalingPoint] = []
    if jobs <= 1:
        for n in n_list:
            point = measure(n)
            points.append(point)
            if on_point:
                on_point(point)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
            future_to_n = {executor.submit(measure, n): n for n in n_list}
            for future in concurrent.futures.as_completed(future_to_n):
                point = future.result()
                points.append(point)
                if on_point:
                    on_point(point)

    points.sort(key=lambda p: p.n)
    missing = [p.n for p in points if p.T is None]
    if missing:
        raise ScalingAbortedError(
            f"Convergence not reached within the horizon for n={missing}", points
        )
    return points
