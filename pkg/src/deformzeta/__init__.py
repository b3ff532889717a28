"""Zeta functions of smooth projective hypersurfaces over finite fields by the
deformation method, with a square-root-in-p solver for the Frobenius
differential equation."""

__version__ = "0.1.0"
