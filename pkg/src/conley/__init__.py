"""Discrete Conley index of isolated invariant sets via box outer approximations."""

__version__ = "0.1.0"
