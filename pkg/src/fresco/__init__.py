"""Forecasting-driven successor-UAV reservation simulator and evaluation harness."""

from .config import RadioParams, ScenarioConfig, load_config
from .model import WorldState, generate_scenario, validate_world

__all__ = [
    "RadioParams",
    "ScenarioConfig",
    "WorldState",
    "generate_scenario",
    "load_config",
    "validate_world",
]

__version__ = "0.1.0"
