"""
Spectral analysis of averaging rules.

Linearizes whole-vector update maps at the consensus origin, checks the
structural properties every convergent averaging rule must have (fixed
consensus, chain rule for compositions, unit row/column sums, a slow
eigenvalue close to 1) and turns eigenvalues into round counts and
lower-bound values.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, Union

import networkx as nx
import numpy as np
import scipy.linalg

from .exceptions import ArgumentError, NumericalError, OutOfTheoremDomainError

logger = logging.getLogger(__name__)

VectorMap = Callable[[np.ndarray], np.ndarray]

DEFAULT_PROBE_STEP = 1e-5
MAX_DENSE_DIM = 4096
IMAG_TOL = 1e-10
# Real eigenvalues within this distance of 1 are treated as the consensus mode
UNIT_EIGENVALUE_GAP = 1e-10
# Real eigenvalues within this distance of 0 are roundoff zeros, never lambda2
ZERO_EIGENVALUE_TOL = 1e-10
EIGEN_RESIDUAL_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-8
LOWER_BOUND_CONSTANT = 6.0


@dataclass(frozen=True, eq=False)
class LinearizationMatrix:
    """Jacobian A = f'(0) of a whole-vector update map."""

    entries: np.ndarray
    source: str = "exact"
    h: Optional[float] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ArgumentError(f"Linearization must be square, got {entries.shape}")
        if self.source not in ("exact", "numerical"):
            raise ArgumentError(f"Unknown linearization source: {self.source}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Eigen-decomposition of a linearization plus the subdominant mode."""

    n: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda2: Optional[float]
    v: Optional[np.ndarray]
    orthogonality_residual: Optional[float]
    unit_row_residual: float
    unit_col_residual: float
    eigen_residual: Optional[float] = None
    method: str = "eig"

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.n else 0.0

    def to_dict(self, head: int = 5) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "n": self.n,
            "eigenvalues": [_format_eigenvalue(w) for w in self.eigenvalues[:head]],
            "lambda2": self.lambda2,
            "orthogonality_residual": self.orthogonality_residual,
            "row_residual": self.unit_row_residual,
            "col_residual": self.unit_col_residual,
            "spectral_radius": self.spectral_radius,
        }
        if self.n >= 3:
            lo, hi = interval_bounds(self.n)
            data["interval"] = (lo, hi)
            data["interval_lo"] = lo
            data["interval_hi"] = hi
            data["pass"] = eigenvalue_interval_check(self, self.n)
        else:
            data["pass"] = "n/a"
        return data


def _format_eigenvalue(w: complex) -> str:
    if abs(w.imag) <= IMAG_TOL:
        return format(w.real, ".6g")
    return f"{w.real:.6g}{w.imag:+.6g}j"


def _entries(A: Union[LinearizationMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(A, LinearizationMatrix):
        return A.entries
    return np.asarray(A, dtype=float)


def numerical_jacobian(
    map: VectorMap, at: np.ndarray, h: float = DEFAULT_PROBE_STEP
) -> LinearizationMatrix:
    """
    Central-difference Jacobian of a whole-vector map.

    J_ij = (f_i(at + h e_j) - f_i(at - h e_j)) / (2h)

    Raises:
        NumericalError: If the map returns non-finite values; `index`
            holds the 1-based probe direction
    """
    if not h > 0:
        raise ArgumentError(f"Probe step must be positive, got h={h}")
    at = np.asarray(at, dtype=float)
    n = len(at)
    jac = np.empty((n, n))

    for j in range(n):
        probe = np.zeros(n)
        probe[j] = h
        forward = np.asarray(map(at + probe), dtype=float)
        backward = np.asarray(map(at - probe), dtype=float)
        if not (np.all(np.isfinite(forward)) and np.all(np.isfinite(backward))):
            raise NumericalError(
                f"Map returned non-finite values when probing direction {j + 1}",
                index=j + 1,
            )
        jac[:, j] = (forward - backward) / (2.0 * h)

    return LinearizationMatrix(entries=jac, source="numerical", h=h)


def compose(map: VectorMap, k: int) -> VectorMap:
    """The k-fold composition of a map."""

    def composed(x: np.ndarray) -> np.ndarray:
        for _ in range(k):
            x = map(x)
        return x

    return composed


def composed_jacobian_residual(
    map: VectorMap,
    A: Union[LinearizationMatrix, np.ndarray],
    k: int,
    h: float = DEFAULT_PROBE_STEP,
) -> float:
    """Frobenius distance between the Jacobian of map^k at 0 and A^k."""
    if k < 1:
        raise ArgumentError(f"Composition power must be at least 1, got k={k}")
    matrix = _entries(A)
    jac = numerical_jacobian(compose(map, k), np.zeros(matrix.shape[0]), h)
    residual = jac.entries - np.linalg.matrix_power(matrix, k)
    return float(np.linalg.norm(residual, "fro"))


def consensus_fixed_point_check(
    map: VectorMap, samples: Iterable[float], n: int
) -> bool:
    """True iff map(a*1) = a*1 to 1e-12 relative tolerance for every sample a."""
    for a in samples:
        x = np.full(n, float(a))
        y = np.asarray(map(x.copy()), dtype=float)
        if y.shape != x.shape or not np.all(np.isfinite(y)):
            return False
        if np.max(np.abs(y - x), initial=0.0) > 1e-12 * max(1.0, abs(a)):
            logger.debug(f"Consensus vector {a}*1 moved by {np.max(np.abs(y - x))}")
            return False
    return True


def stochasticity_check(A: Union[LinearizationMatrix, np.ndarray]) -> Tuple[float, float]:
    """Residual norms ||A1 - 1|| and ||1^T A - 1^T||."""
    matrix = _entries(A)
    ones = np.ones(matrix.shape[0])
    row = float(np.linalg.norm(matrix @ ones - ones))
    col = float(np.linalg.norm(ones @ matrix - ones))
    return row, col


def eigen_decompose(A: Union[LinearizationMatrix, np.ndarray]) -> SpectralReport:
    """
    Full eigen-decomposition with the subdominant real mode extracted.

    Eigenvalues are sorted by decreasing modulus. lambda2 is the largest
    real eigenvalue in (0, 1), paired with the eigenvector of its cluster
    that is closest to orthogonal to the consensus vector.

    Raises:
        ArgumentError: Above the dense-solver dimension budget
        NumericalError: On eigensolver failure or a residual above 1e-8
    """
    matrix = _entries(A)
    n = matrix.shape[0]
    if n > MAX_DENSE_DIM:
        raise ArgumentError(f"Dense eigensolver limited to n <= {MAX_DENSE_DIM}, got {n}")
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("Matrix has non-finite entries", diagnostics={"n": n})

    symmetric = np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-14)
    method = "eigh" if symmetric else "eig"
    try:
        if symmetric:
            values, vectors = scipy.linalg.eigh(matrix)
            values = values.astype(complex)
        else:
            values, vectors = scipy.linalg.eig(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            f"Eigensolver failed: {e}", diagnostics={"n": n, "method": method}
        )

    order = np.lexsort((-values.real, -np.abs(values)))
    values = values[order]
    vectors = vectors[:, order]
    row, col = stochasticity_check(matrix)

    lambda2, v, ortho, residual = _subdominant_mode(matrix, values, vectors)
    if residual is not None and residual > EIGEN_RESIDUAL_TOL:
        raise NumericalError(
            f"Eigenvector residual {residual:.3e} exceeds {EIGEN_RESIDUAL_TOL}",
            diagnostics={"n": n, "method": method, "lambda2": lambda2},
        )

    logger.debug(f"Decomposed {n}x{n} matrix with {method}: lambda2={lambda2}")
    return SpectralReport(
        n=n,
        eigenvalues=values,
        eigenvectors=vectors,
        lambda2=lambda2,
        v=v,
        orthogonality_residual=ortho,
        unit_row_residual=row,
        unit_col_residual=col,
        eigen_residual=residual,
        method=method,
    )


def _subdominant_mode(
    matrix: np.ndarray, values: np.ndarray, vectors: np.ndarray
) -> Tuple[Optional[float], Optional[np.ndarray], Optional[float], Optional[float]]:
    real = values.real
    candidates = np.nonzero(
        (np.abs(values.imag) <= IMAG_TOL)
        & (real > ZERO_EIGENVALUE_TOL)
        & (real < 1.0 - UNIT_EIGENVALUE_GAP)
    )[0]
    if len(candidates) == 0:
        return None, None, None, None

    lam = float(np.max(real[candidates]))
    cluster = [k for k in candidates if abs(real[k] - lam) <= IMAG_TOL]
    best_v, best_ortho = None, math.inf
    for k in cluster:
        v = _normalize(vectors[:, k].real)
        ortho = abs(float(np.sum(v)))
        if ortho < best_ortho:
            best_v, best_ortho = v, ortho

    residual = float(np.linalg.norm(matrix @ best_v - lam * best_v))
    return lam, best_v, best_ortho, residual


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    # Sign convention: first clearly nonzero entry positive
    nonzero = np.nonzero(np.abs(v) > 1e-12)[0]
    if len(nonzero) and v[nonzero[0]] < 0:
        v = -v
    return v


def slowest_mode(report: SpectralReport) -> Tuple[float, np.ndarray]:
    """
    The slowest-decaying mode orthogonal to consensus.

    This is (lambda2, v) when the report has one; otherwise the real
    eigenpair of largest modulus among eigenvectors orthogonal to 1.
    """
    if report.lambda2 is not None:
        return report.lambda2, report.v

    best: Optional[Tuple[float, np.ndarray]] = None
    for k, value in enumerate(report.eigenvalues):
        if abs(value.imag) > IMAG_TOL or abs(value.real - 1.0) <= UNIT_EIGENVALUE_GAP:
            continue
        v = _normalize(report.eigenvectors[:, k].real)
        if abs(float(np.sum(v))) > 1e-6:
            continue
        real = 0.0 if abs(value.real) <= ZERO_EIGENVALUE_TOL else float(value.real)
        if best is None or abs(real) > abs(best[0]):
            best = (real, v)
    if best is None:
        raise ArgumentError("Matrix has no real mode orthogonal to the consensus vector")
    return best


def interval_bounds(n: int) -> Tuple[float, float]:
    """The interval (1 - 6/n^2, 1) that must contain a slow eigenvalue."""
    return 1.0 - LOWER_BOUND_CONSTANT / n**2, 1.0


def eigenvalue_interval_check(report: SpectralReport, n: int) -> bool:
    """True iff lambda2 exists, lies in (1 - 6/n^2, 1) and v is orthogonal to 1."""
    if n < 3:
        raise OutOfTheoremDomainError(f"Interval check needs n >= 3, got n={n}")
    if report.lambda2 is None:
        return False
    lo, hi = interval_bounds(n)
    return (
        lo < report.lambda2 < hi
        and report.orthogonality_residual is not None
        and report.orthogonality_residual <= ORTHOGONALITY_TOL
    )


def _check_bound_domain(n: int, epsilon: float) -> None:
    if n < 3:
        raise OutOfTheoremDomainError(f"Lower bound holds for n >= 3, got n={n}")
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"Shrink factor must lie in (0, 1), got {epsilon}")


def lower_bound_value(n: int, epsilon: float) -> float:
    """(n^2 / 30) * ln(1 / epsilon), with the natural logarithm."""
    _check_bound_domain(n, epsilon)
    return n**2 / 30.0 * math.log(1.0 / epsilon)


def lower_bound_exact(n: int, epsilon: float) -> float:
    """
    ln(1/epsilon) / (-2 ln(1 - 6/n^2)).

    The variance decays as lambda^(2k), so a mode with lambda above
    1 - 6/n^2 needs at least this many rounds. This is the bound before
    relaxing log(1 - a) >= 5(a - 1); never below lower_bound_value.
    """
    _check_bound_domain(n, epsilon)
    return math.log(1.0 / epsilon) / (-2.0 * math.log1p(-LOWER_BOUND_CONSTANT / n**2))


def spectral_predicted_time(lambda2: float, epsilon: float) -> int:
    """First k with lambda2^(2k) <= epsilon."""
    if not 0.0 < lambda2 < 1.0:
        raise ArgumentError(f"lambda2 must lie in (0, 1), got {lambda2}")
    if not 0.0 < epsilon < 1.0:
        raise ArgumentError(f"Shrink factor must lie in (0, 1), got {epsilon}")

    k = max(1, math.ceil(math.log(epsilon) / (2.0 * math.log(lambda2))))
    # Settle rounding in the logarithm ratio against the defining inequality
    while k > 1 and lambda2 ** (2 * (k - 1)) <= epsilon:
        k -= 1
    while lambda2 ** (2 * k) > epsilon:
        k += 1
    return k


def spectral_certificate(A: Union[LinearizationMatrix, np.ndarray]) -> bool:
    """
    True when A keeps V non-increasing from every start.

    Holds iff A1 = 1, 1^T A = 1^T and ||A - 11^T/n||_2 <= 1, since then
    x(t+1) - m1 = (A - 11^T/n)(x(t) - m1) for the preserved mean m.
    """
    matrix = _entries(A)
    n = matrix.shape[0]
    row, col = stochasticity_check(matrix)
    if row > 1e-9 or col > 1e-9:
        return False
    contraction = np.linalg.norm(matrix - np.full((n, n), 1.0 / n), 2)
    return bool(contraction <= 1.0 + 1e-12)


def tridiagonal_residual(A: Union[LinearizationMatrix, np.ndarray]) -> float:
    """Largest |a_ij| with |i - j| > 1."""
    matrix = _entries(A)
    n = matrix.shape[0]
    if n <= 2:
        return 0.0
    i, j = np.indices((n, n))
    return float(np.max(np.abs(matrix[np.abs(i - j) > 1])))


def irreducibility_check(
    A: Union[LinearizationMatrix, np.ndarray], tol: float = 0.0
) -> bool:
    """True iff the digraph of off-diagonal entries |a_ij| > tol is strongly connected."""
    matrix = _entries(A)
    n = matrix.shape[0]
    digraph = nx.DiGraph()
    digraph.add_nodes_from(range(n))
    rows, cols = np.nonzero(np.abs(matrix) > tol)
    digraph.add_edges_from((int(r), int(c)) for r, c in zip(rows, cols) if r != c)
    return nx.is_strongly_connected(digraph)
