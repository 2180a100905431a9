"""Exact constrained proportional awards for allocation problems with crossed claims."""

__version__ = "0.1.0"
