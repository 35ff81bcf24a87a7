"""Numerical laboratory for the mu-Hunter-Saxton equation on the circle.

Modules: ``spectral`` (grids, the inertia operator), ``evolution`` (time
stepping, lifespan criteria, Hill spectrum), ``hierarchy`` (bihamiltonian
ladder, Virasoro picture), ``waves`` (traveling waves), ``geometry``
(metric and curvature), ``initspec`` and ``cli``.
"""
from .errors import MuHSError
from .spectral import PeriodicGrid, RealField

__version__ = "0.1.0"

__all__ = ["MuHSError", "PeriodicGrid", "RealField", "__version__"]
