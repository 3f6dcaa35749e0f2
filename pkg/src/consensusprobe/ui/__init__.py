"""Command-line interface for consensusprobe."""

from .cli import cli

__all__ = ["cli"]
