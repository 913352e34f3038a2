"""Numerical toolkit for Toeplitz operators with measure symbols on the Bergman and Fock spaces."""

__version__ = "0.1.0"
