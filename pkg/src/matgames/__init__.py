"""Sublinear and variance-reduced solvers for bilinear saddle-point games
on simplex and euclidean-ball domains, plus the data structures that make
sparse iteration possible."""

__version__ = "1.0.0"

from . import errors, estimators, geometry, sparse_matrix
from .geometry import Point, Setup, make_setup, gap
from .sparse_matrix import SparseMatrix, build, load_matrix_market

__all__ = [
    "errors", "estimators", "geometry", "sparse_matrix",
    "Point", "Setup", "make_setup", "gap",
    "SparseMatrix", "build", "load_matrix_market",
    "__version__",
]
