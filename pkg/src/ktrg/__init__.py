"""Multiscale RG toolkit for the 2D lattice Coulomb gas at the KT point."""

__version__ = "0.1.0"
