"""Parallel routing over disjoint paths on a virtual grid for MANETs."""

__version__ = "0.1.0"
