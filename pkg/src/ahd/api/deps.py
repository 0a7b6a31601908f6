"""
API Dependencies

Dependency providers for the service routers. The app factories store
the service objects on app.state.
"""

from fastapi import Request

from ahd.evolution import ProgramDatabase
from ahd.services.evaluator import Evaluator

from .auth import require_api_key  # noqa: F401 - re-export for router imports


def get_database(request: Request) -> ProgramDatabase:
    """The program database served by this app."""
    database: ProgramDatabase = request.app.state.database
    return database


def get_evaluator(request: Request) -> Evaluator:
    evaluator: Evaluator = request.app.state.evaluator
    return evaluator
