"""Spectral community detection with the non-backtracking operator."""

__version__ = "0.1.0"
