"""Equilibrium solver for two-player resource-allocation games on graphs."""

__version__ = "0.1.0"
