"""Supersymmetric quantum mechanics with additive shape invariance."""

__version__ = "0.1.0"
