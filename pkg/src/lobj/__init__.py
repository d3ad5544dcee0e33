"""Interpreter and type checker for a calculus of self-extending objects."""

__version__ = "0.1.0"
