"""Command line: codegen, sweep, bench, evolve and report."""

from .main import build_parser, main

__all__ = ["build_parser", "main"]
