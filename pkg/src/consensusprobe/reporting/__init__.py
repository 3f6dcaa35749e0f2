"""
Reporting module for consensusprobe.

Report formats (key=value, JSON, Markdown) and CSV exports.
"""

from ..core.exceptions import ConfigurationError
from .base import Reporter, format_scalar
from .csv_export import (
    read_matrix_csv,
    write_matrix_csv,
    write_scaling_csv,
    write_trajectory_csv,
    write_variance_csv,
)
from .json_reporter import JSONReporter
from .kv_reporter import KeyValueReporter
from .markdown_reporter import MarkdownReporter

# Registry of available reporters
REPORTERS = {
    "kv": KeyValueReporter,
    "text": KeyValueReporter,  # Alias
    "json": JSONReporter,
    "markdown": MarkdownReporter,
    "md": MarkdownReporter,  # Alias
}


def get_reporter(format: str) -> Reporter:
    """
    Get a reporter instance for the specified format.

    Raises:
        ConfigurationError: If format is not supported
    """
    format = format.lower()
    if format not in REPORTERS:
        raise ConfigurationError(
            f"Unsupported report format: {format}. "
            f"Available formats: {', '.join(REPORTERS.keys())}"
        )

    return REPORTERS[format]()


__all__ = [
    "Reporter",
    "KeyValueReporter",
    "JSONReporter",
    "MarkdownReporter",
    "REPORTERS",
    "get_reporter",
    "format_scalar",
    "write_trajectory_csv",
    "write_variance_csv",
    "write_scaling_csv",
    "write_matrix_csv",
    "read_matrix_csv",
]
