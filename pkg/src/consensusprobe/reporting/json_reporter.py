"""
JSON reporter for consensusprobe.
"""

import json
from typing import Any, Dict

import numpy as np

from .base import Reporter


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)


class JSONReporter(Reporter):
    """Reporter that outputs JSON format."""

    def format_report(self, data: Dict[str, Any]) -> str:
        from .. import __version__

        report = {
            "report_metadata": {
                "generator": "consensusprobe",
                "format": "json",
                "version": __version__,
            },
            "results": data,
        }

        indent = self.config.get("indent", 2)
        sort_keys = self.config.get("sort_keys", False)
        return json.dumps(report, indent=indent, sort_keys=sort_keys, default=_to_builtin) + "\n"

    def get_file_extension(self) -> str:
        return ".json"
