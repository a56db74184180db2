"""Monodromy and extension classes of inhomogeneous Picard-Fuchs equations."""

__version__ = "0.1.0"
