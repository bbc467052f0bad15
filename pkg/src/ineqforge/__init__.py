"""Numerical laboratory for higher-order Hardy-Rellich-Sobolev interpolation inequalities."""

__version__ = "0.1.0"
