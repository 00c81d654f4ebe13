"""Super Teichmueller coordinates on ideal triangulations: Grassmann
arithmetic, supermatrices, the special light cone, lifts, holonomies and
Ptolemy flips."""

from .grassmann import GrassmannNumber, inv, sqrt_even
from .ptolemy import FlipResult, UnsupportedFlipError, classify_quad, flip, flip_quad
from .surface import (CoordinateVector, SurfaceComplex, build_surface, dump_surface, load_surface,
                      random_coordinates, sphere_f03, sphere_f03_theta, sphere_f04, torus_f11)
from .teichmueller import build_lift, holonomy

__version__ = "0.1.0"

__all__ = [
    "GrassmannNumber", "inv", "sqrt_even",
    "FlipResult", "UnsupportedFlipError", "classify_quad", "flip", "flip_quad",
    "CoordinateVector", "SurfaceComplex", "build_surface", "dump_surface", "load_surface",
    "random_coordinates", "sphere_f03", "sphere_f03_theta", "sphere_f04", "torus_f11",
    "build_lift", "holonomy",
]
