"""
Flat key=value reporter: one `key=value` line per field.
"""

from typing import Any, Dict

from .base import Reporter, format_scalar


class KeyValueReporter(Reporter):
    """Reporter that outputs `key=value` lines, floats to six significant digits."""

    def format_report(self, data: Dict[str, Any]) -> str:
        return "".join(f"{key}={format_scalar(value)}\n" for key, value in data.items())

    def get_file_extension(self) -> str:
        return ".txt"
