"""Numerical laboratory for one-dimensional SDEs with generalized and singular drift."""

__version__ = "0.1.0"
