"""Conditioned Galton-Watson trees, discrete snakes and their statistics."""

__version__ = "0.1.0"
