"""Exact quantum solution of a charged anisotropic oscillator in static E and B fields."""

__version__ = "0.1.0"
