"""Expansion-based approximation of fractional derivatives and fractional optimal control."""

__version__ = "0.1.0"
