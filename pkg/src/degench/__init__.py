"""Validation suite for the radially symmetric degenerate Cahn-Hilliard
equation: spectral phase-field solver, stationary free-boundary states,
closed-form sharp-interface asymptotics, and relaxation-rate benchmarks."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticBundle,
    decay_rate_one_sided_bulk,
    decay_rate_surface_diffusion,
    decay_rate_two_sided_bulk,
    dilog,
    make_bundle,
    matching_mismatch,
    sharp_interface_coefficients,
)
from .grid import SpectralGrid, arctan_map, build_grid, interpolate, lobatto_points, reference_diff_matrix
from .mobility import MobilityKind

__all__ = [
    "__version__",
    "AsymptoticBundle",
    "MobilityKind",
    "SpectralGrid",
    "arctan_map",
    "build_grid",
    "decay_rate_one_sided_bulk",
    "decay_rate_surface_diffusion",
    "decay_rate_two_sided_bulk",
    "dilog",
    "interpolate",
    "lobatto_points",
    "make_bundle",
    "matching_mismatch",
    "reference_diff_matrix",
    "sharp_interface_coefficients",
]
