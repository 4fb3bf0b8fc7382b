from .errors import (
    SolverError,
    ParameterError,
    DegenerateCost,
    NonPositive,
    RiskOutOfRange,
    ConfigError,
    GridError,
    DomainError,
    NumericalError,
    NoConvergence,
    InstabilityError,
    NoBracket,
    Unattainable,
)
from .params import ModelParams, Regime, validate, classify
from .schemas import SimConfig, PdeGrid, RunConfig

__all__ = [
    # 예외
    "SolverError",
    "ParameterError",
    "DegenerateCost",
    "NonPositive",
    "RiskOutOfRange",
    "ConfigError",
    "GridError",
    "DomainError",
    "NumericalError",
    "NoConvergence",
    "InstabilityError",
    "NoBracket",
    "Unattainable",
    # 모형
    "ModelParams",
    "Regime",
    "validate",
    "classify",
    # 실행 설정
    "SimConfig",
    "PdeGrid",
    "RunConfig",
]
