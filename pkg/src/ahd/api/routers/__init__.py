"""Service routers."""

from . import database, evaluator

__all__ = ["database", "evaluator"]
