"""Bottlenecks of pairs of algebraic varieties by homotopy continuation."""

__version__ = "0.1.0"
