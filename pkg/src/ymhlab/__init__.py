"""Numerical laboratory for SU(2) Yang-Mills-Higgs concentration in codimension three."""

__version__ = "0.1.0"
