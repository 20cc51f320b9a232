"""Reservoir-method solvers for linear hyperbolic systems and their quantum circuits."""

__version__ = "0.1.0"
