"""Floquet spectral splitting and center manifold reduction toolkit."""

from ._core import (
    NumericError,
    ProblemParseError,
    PropertyCheckError,
    System,
    __version__,
)

__all__ = [
    "System",
    "ProblemParseError",
    "NumericError",
    "PropertyCheckError",
    "__version__",
]
