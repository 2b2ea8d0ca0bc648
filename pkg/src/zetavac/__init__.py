"""Zeta-renormalized vacuum observables of a scalar field from the spectral
data of A = -Laplacian (V = 0)."""

__version__ = "0.1.0"
