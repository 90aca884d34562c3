"""Mutual-information measures of structural inequality in attributed networks."""

__version__ = "0.1.0"
