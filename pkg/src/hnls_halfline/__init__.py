"""Unified-transform solver for a third-order nonlinear Schroedinger equation on the half-line."""

__version__ = "0.1.0"
