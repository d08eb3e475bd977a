"""Spectral laboratory for the hyperelastic rod equation on the circle."""

__version__ = "0.1.0"

from .spectral import (
    SpectralField,
    TorusGrid,
    bessel_potential,
    derivative,
    helmholtz_inverse,
    interpolation_gap,
    product,
    sobolev_norm,
)
from .dynamics import HRParams, Trajectory, evolve, hr_rhs, difference_rhs, h1_energy

__all__ = [
    "SpectralField",
    "TorusGrid",
    "bessel_potential",
    "derivative",
    "helmholtz_inverse",
    "interpolation_gap",
    "product",
    "sobolev_norm",
    "HRParams",
    "Trajectory",
    "evolve",
    "hr_rhs",
    "difference_rhs",
    "h1_energy",
]
