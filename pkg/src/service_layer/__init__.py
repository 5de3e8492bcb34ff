"""
Services package for suBART Lab.

This package provides service classes for the command-line workflows.
"""

from src.service_layer.fit_service import FitService
from src.service_layer.cea_service import CeaService
from src.service_layer.simulation_service import SimulationService

__all__ = [
    'FitService',
    'CeaService',
    'SimulationService',
]
