"""Rigorous enumeration and verification of planar central configurations
of the equal-mass n-body problem, built on outward-rounded interval
arithmetic and operator-based certification."""

__version__ = "0.1.0"
