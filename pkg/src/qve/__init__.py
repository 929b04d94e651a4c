"""Numerical harness for the quantum variance of Eisenstein series on the modular surface."""

__version__ = "0.1.0"
