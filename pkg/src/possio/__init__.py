"""Laplace-domain lifting-surface solver for two-dimensional subsonic flow.

Given a downwash history on the chord [-1, 1], the package solves the
singular integral equation relating downwash to the pressure-doublet density
in the Laplace domain, then reconstructs the disturbance velocity potential
and acceleration potential anywhere in the flow.
"""
from ._core import BACKEND_NAME

__version__ = "0.1.0"

__all__ = ["BACKEND_NAME", "__version__"]
