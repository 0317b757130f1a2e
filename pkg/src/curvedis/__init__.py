"""Approximation of probability measures on compact manifolds by closed curves."""

__version__ = "0.1.0"
