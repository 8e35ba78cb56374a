"""Exact saturating-set engine for the Navier-Stokes equations in a 3D cylinder."""

__version__ = "0.1.0"
