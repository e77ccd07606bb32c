"""Numerical and symbolic verification lab for the Green-function matrix
Harnack inequality on rotationally symmetric model manifolds."""

__version__ = "0.1.0"
