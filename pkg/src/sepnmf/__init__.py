"""Separable NMF toolkit.

Greedy column selection by successive projection, ellipsoid-based
preconditioning, subspace-iteration rank-k approximation, and a seeded
synthetic benchmark harness with error-bound diagnostics.
"""

__version__ = "0.1.0"

from .backend import active_backend
from .errors import SepnmfError

__all__ = ["__version__", "active_backend", "SepnmfError"]
