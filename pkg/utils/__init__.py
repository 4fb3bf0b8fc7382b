from .numerics import (
    BisectionResult,
    expand_bracket,
    bisect_scalar,
    bisect_decreasing,
    nonuniform_stencils,
)

__all__ = [
    "BisectionResult",
    "expand_bracket",
    "bisect_scalar",
    "bisect_decreasing",
    "nonuniform_stencils",
]
