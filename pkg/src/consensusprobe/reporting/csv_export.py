"""
CSV exports for trajectories, variance series, scaling sweeps and matrices.

Floats are written with repr() so identical runs give identical bytes.
Agents are 1-indexed in every file.
"""

import csv
import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from ..core.engine import Trajectory
from ..core.exceptions import ArgumentError
from ..core.scaling import ScalingPoint
from ..core.spectral import LinearizationMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRAJECTORY_HEADER = ["t", "agent", "value"]
VARIANCE_HEADER = ["t", "V"]
SCALING_HEADER = ["n", "T", "lower_bound", "audit", "upper_ratio"]


def _open_for_write(path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """Every stored state as `t,agent,value` rows."""
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for t, x in trajectory.stored_states():
            for agent, value in enumerate(x, start=1):
                writer.writerow([t, agent, repr(float(value))])
    logger.debug(f"Wrote trajectory CSV to {path}")
    return Path(path)


def write_variance_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """The full variance series as `t,V` rows."""
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(VARIANCE_HEADER)
        for t, v in enumerate(trajectory.variance):
            writer.writerow([t, repr(float(v))])
    logger.debug(f"Wrote variance CSV to {path}")
    return Path(path)


def write_scaling_csv(points: Sequence[ScalingPoint], path: PathLike) -> Path:
    """One row per n, sorted by n; unreached points show `not-reached`."""
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCALING_HEADER)
        for point in sorted(points, key=lambda p: p.n):
            audit = point.audit
            writer.writerow(
                [
                    point.n,
                    point.T if point.T is not None else "not-reached",
                    repr(point.lower_bound) if point.lower_bound is not None else "",
                    "n/a" if audit is None else ("pass" if audit else "fail"),
                    repr(point.upper_ratio) if point.upper_ratio is not None else "",
                ]
            )
    logger.debug(f"Wrote scaling CSV to {path}")
    return Path(path)


def write_matrix_csv(A: Union[LinearizationMatrix, np.ndarray], path: PathLike) -> Path:
    """Row-major matrix under a `# n=<dim>` header."""
    entries = A.entries if isinstance(A, LinearizationMatrix) else np.asarray(A, dtype=float)
    with _open_for_write(path) as f:
        f.write(f"# n={entries.shape[0]}\n")
        writer = csv.writer(f, lineterminator="\n")
        for row in entries:
            writer.writerow([repr(float(v)) for v in row])
    return Path(path)


def read_matrix_csv(path: PathLike) -> LinearizationMatrix:
    """
    Read a matrix written by write_matrix_csv.

    Raises:
        ArgumentError: On a missing header, ragged rows or a dimension mismatch
    """
    path = Path(path)
    if not path.exists():
        raise ArgumentError(f"Matrix file not found: {path}")

    with open(path, newline="") as f:
        header = f.readline().strip()
        if not header.startswith("# n="):
            raise ArgumentError(f"{path}: expected '# n=<dim>' header, got {header!r}")
        try:
            n = int(header[len("# n="):])
            rows = [[float(v) for v in row] for row in csv.reader(f) if row]
        except ValueError as e:
            raise ArgumentError(f"{path}: malformed matrix entry: {e}")

    if len(rows) != n or any(len(row) != n for row in rows):
        raise ArgumentError(f"{path}: header declares n={n}, body is not {n}x{n}")
    return LinearizationMatrix(entries=np.array(rows, dtype=float).reshape(n, n))
