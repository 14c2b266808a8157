"""Numerical toolkit for symmetry-protected and topological qubit encodings."""

__version__ = "0.1.0"
