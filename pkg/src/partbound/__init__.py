"""Exact linear-programming lower bounds for communication and query complexity."""

__version__ = "0.1.0"
