"""Euclid numbers and polynomials, their height-1 companion matrices, and
conditioning experiments comparing matrix and coefficient representations."""

__version__ = "0.1.0"

from .companion import (
    CompanionMatrix,
    VariantConfig,
    build_companion,
    build_mandelbrot_companion,
    build_tilde,
    verify_charpoly,
)
from .exact_poly import (
    BigIntPoly,
    DyadicPoly,
    DyadicRational,
    euclid_numbers,
    euclid_poly,
    shifted_euclid_poly,
)
from .spectra import Spectrum, compute_spectrum, eigenvalues

__all__ = [
    "BigIntPoly", "CompanionMatrix", "DyadicPoly", "DyadicRational", "Spectrum",
    "VariantConfig", "build_companion", "build_mandelbrot_companion", "build_tilde",
    "compute_spectrum", "eigenvalues", "euclid_numbers", "euclid_poly",
    "shifted_euclid_poly", "verify_charpoly",
]
