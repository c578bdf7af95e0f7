"""Poisson summation on rational quadrics: both sides of the summation identity, computed."""

__version__ = "0.1.0"
