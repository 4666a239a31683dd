"""Photon-pair source characterization with imperfect threshold detectors."""

__version__ = "1.0.0"
