"""Lie-algebra/Spencer-complex kernels, a characteristic-line integrator, and a
pseudo-spectral 2D Euler solver with conserved-invariant monitoring."""

__version__ = "0.1.0"
