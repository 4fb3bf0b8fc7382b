from .settings import SolverSettings, get_settings
from .presets import PRESETS, FigurePreset, get_preset

__all__ = ["SolverSettings", "get_settings", "PRESETS", "FigurePreset", "get_preset"]
