"""
Markdown reporter for consensusprobe.

Renders a result block as a two-column table.
"""

from typing import Any, Dict

from .base import Reporter, format_scalar


class MarkdownReporter(Reporter):
    """Reporter that outputs Markdown format."""

    def format_report(self, data: Dict[str, Any]) -> str:
        title = self.config.get("title", "consensusprobe report")
        lines = [f"# {title}", "", "| Field | Value |", "|-------|-------|"]
        for key, value in data.items():
            lines.append(f"| {key} | {self._format_value(value)} |")
        return "\n".join(lines) + "\n"

    def get_file_extension(self) -> str:
        return ".md"

    def _format_value(self, value: Any) -> str:
        text = format_scalar(value)
        # Keep pipes and markdown markup out of the table cells
        if any(c in text for c in ["|", "*", "_", "`", "[", "]"]):
            return f"`{text}`"
        return text
