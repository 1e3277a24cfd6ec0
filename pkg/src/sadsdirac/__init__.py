"""Massive Dirac resolvent and resonances on the Schwarzschild-AdS exterior."""

__version__ = "0.1.0"
