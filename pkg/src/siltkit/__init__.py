"""Silting theory toolkit for small extriangulated categories over F_p."""

__version__ = "0.1.0"
