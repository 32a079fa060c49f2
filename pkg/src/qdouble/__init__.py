"""Twisted quantum doubles of finite abelian groups and their quadratic spaces."""

__version__ = "0.1.0"
