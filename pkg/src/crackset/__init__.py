"""Crack-set modification engine and Korn-Poincare verification on lattice configurations."""
__version__ = "0.1.0"
