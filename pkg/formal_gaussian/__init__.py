"""Formal Gaussian - exact formal Gaussian integration for power series composition and inversion."""

__version__ = "0.1.0"
