"""Batch figure rendering for simulation sweep CSV outputs."""

__version__ = "0.1.0"
