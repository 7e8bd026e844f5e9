"""Numerical laboratory for degenerating hyperbolic surfaces and
thick-part Bergman embeddings of pluricanonical systems."""

__version__ = "0.1.0"

from . import bergman, cli, collar_model, degeneration, differentials, surface_model

__all__ = [
    "__version__",
    "surface_model",
    "collar_model",
    "differentials",
    "bergman",
    "degeneration",
    "cli",
]
