"""Stroke restoration toolkit: radius-carrying spline fitting on noisy document images."""

__version__ = "0.1.0"
