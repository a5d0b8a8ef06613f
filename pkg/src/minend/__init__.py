"""Numerical construction and verification of minimal ends in H2 x R."""
__version__ = "0.1.0"
