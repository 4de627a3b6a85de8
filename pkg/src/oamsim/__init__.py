"""Desk-scale simulator of orbital-angular-momentum entanglement of photon pairs."""

__version__ = "0.1.0"
