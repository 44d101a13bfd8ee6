"""Sandpile equilibria on partially open tables."""
__version__ = "0.1.0"
