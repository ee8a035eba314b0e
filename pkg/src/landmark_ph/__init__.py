"""Landmark-based persistent homology features for grayscale images."""

__version__ = "0.1.0"
