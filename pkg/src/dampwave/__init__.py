"""Numerical laboratory for 2D semilinear waves with scale-invariant damping."""

__version__ = "0.1.0"
