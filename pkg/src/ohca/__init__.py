"""Optimal hybrid channel allocation."""

__version__ = "0.1.0"
