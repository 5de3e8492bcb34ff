"""
Repositories package for the simulation results store.

This package provides repository classes for database operations.
"""

from src.database_management.repositories.simulation_repository import SimulationRepository, RESULT_COLUMNS

__all__ = [
    'SimulationRepository',
    'RESULT_COLUMNS',
]
