"""Verification toolkit for the three-spin exclusion protocol"""

__version__ = "1.0.0"
