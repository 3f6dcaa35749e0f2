"""
Base reporter class for consensusprobe reports.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np


class Reporter(ABC):
    """Abstract base class for report generators."""

    def __init__(self):
        self.config: Dict[str, Any] = {}

    @abstractmethod
    def format_report(self, data: Dict[str, Any]) -> str:
        """
        Format a flat result mapping into a report.

        Args:
            data: Result fields in display order

        Returns:
            Formatted report as string
        """

    @abstractmethod
    def get_file_extension(self) -> str:
        """Get the file extension for this report format."""

    def save(self, data: Dict[str, Any], filepath: Union[str, Path]) -> Path:
        """Save report to file, adding the format's extension if missing."""
        filepath = Path(filepath)
        if not filepath.suffix:
            filepath = filepath.with_suffix(self.get_file_extension())
        filepath.parent.mkdir(parents=True, exist_ok=True)
        filepath.write_text(self.format_report(data))
        return filepath

    def set_config(self, config: Dict[str, Any]):
        """Set reporter configuration."""
        self.config = config


def format_scalar(value: Any) -> str:
    """Render one value the way the key=value block shows it."""
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    if isinstance(value, tuple):
        return "(" + ",".join(format_scalar(v) for v in value) + ")"
    if isinstance(value, (list, np.ndarray)):
        return ",".join(format_scalar(v) for v in value)
    return str(value)
