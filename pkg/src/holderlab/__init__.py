"""Numerical laboratory for eigenvalue bounds of Schrödinger operators on Hölder domains."""

__version__ = "0.1.0"
