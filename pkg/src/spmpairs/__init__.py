"""Photon-pair generation in dispersion-shifted fiber with SPM pump leakage."""

__version__ = "0.1.0"
