"""Detect inconsistencies between documented multi-parameter constraints and code."""

__version__ = "0.1.0"
