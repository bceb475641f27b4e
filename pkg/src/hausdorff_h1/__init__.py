"""Hausdorff operators on H^1 of locally compact groups of homogeneous type."""

__version__ = "0.1.0"
