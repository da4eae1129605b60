"""Simulation and certificate checking for nonlocal shadow pattern-formation systems."""

__version__ = "0.1.0"
