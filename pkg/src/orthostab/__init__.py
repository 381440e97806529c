"""Numerical certification of Hyers-Ulam stability for the orthogonal Pexider equation."""

__version__ = "0.1.0"
