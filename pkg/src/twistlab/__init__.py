"""Frenet-frame analysis, classification and formula auditing for space curves."""

__version__ = "0.1.0"
