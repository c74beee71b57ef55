"""Significant-vector regression for curve-valued single-variable models."""

__version__ = "0.1.0"
