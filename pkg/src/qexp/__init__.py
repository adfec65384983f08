"""Pade forms for the q-exponential and explicit irrationality measures."""

__version__ = "0.1.0"
