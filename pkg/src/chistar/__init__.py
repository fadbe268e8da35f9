"""Modular polynomials for j and the almost holomorphic function chi*."""

from .errors import ChiStarError

__version__ = "0.1.0"

__all__ = ["ChiStarError", "__version__"]
