"""Thermal coherent states of Heisenberg-Weyl, su(2) and su(1,1) in thermofield dynamics."""

__version__ = "0.1.0"
