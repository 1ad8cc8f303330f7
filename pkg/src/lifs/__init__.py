"""Numerics for local iterated function systems and local fractal functions."""

__version__ = "0.1.0"
