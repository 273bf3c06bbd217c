"""Simulation of optical cat, grid (GKP) and magic states heralded by comb-shaped free electrons."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .errors import ConfigError, GkpForgeError, UnconvergedError, ValidationFailure, ZeroProbabilityError  # noqa: E402

__all__ = ["BACKEND", "ConfigError", "GkpForgeError", "UnconvergedError", "ValidationFailure",
           "ZeroProbabilityError", "__version__"]
