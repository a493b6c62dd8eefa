"""Sheaf and cosheaf convolution of persistence modules."""

__version__ = "0.1.0"
