"""Blow-up criteria, moment functionals and a 1-D kinetic-fluid simulator."""

__version__ = "0.1.0"
