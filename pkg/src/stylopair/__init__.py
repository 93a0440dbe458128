"""Pairwise stylometric authorship verification."""

__version__ = "0.1.0"
