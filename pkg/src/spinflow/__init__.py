"""Hamiltonian field dynamics of spin-s magnets on periodic lattices."""

__version__ = "0.1.0"
