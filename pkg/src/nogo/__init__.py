"""Finite-dimensional checks of hidden-variable no-go theorems."""

__version__ = "0.1.0"
