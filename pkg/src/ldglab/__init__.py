"""Numerical laboratory for the norm-constrained Landau-de Gennes model of
S1-equivariant Q-tensor fields on axisymmetric domains."""

__version__ = "0.1.0"
