"""Hilbert transforms along curves, anisotropic dilations and their analytic multiplier families."""

from .geometry import DilationGroup, DomainError, dilate, polar, polar_decompose, rho
from .curves import ConvexPlane, Homogeneous, TwoSided, convex_from_name, make_two_sided

__version__ = "0.1.0"

__all__ = ["DilationGroup", "DomainError", "dilate", "polar", "polar_decompose", "rho",
           "ConvexPlane", "Homogeneous", "TwoSided", "convex_from_name", "make_two_sided"]
