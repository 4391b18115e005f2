"""Sampler-independent reference values: quadrature, spectra, transition densities."""

from .grid import (
    GibbsReference,
    GridSpec,
    QuadratureError,
    gibbs_reference,
    grid_expectation,
    grid_partition_function,
    laplace_partition_function,
    truncated_domain,
    well_masses,
)
from .spectral import SpectralError, SpectralSummary, arrhenius_slope, eigenfunction_flatness, spectral_solve
from .transition import TransitionEstimate, transition_density_diagonal, transition_density_sweep

__all__ = [
    "GibbsReference",
    "GridSpec",
    "QuadratureError",
    "SpectralError",
    "SpectralSummary",
    "TransitionEstimate",
    "arrhenius_slope",
    "eigenfunction_flatness",
    "gibbs_reference",
    "grid_expectation",
    "grid_partition_function",
    "laplace_partition_function",
    "spectral_solve",
    "transition_density_diagonal",
    "transition_density_sweep",
    "truncated_domain",
    "well_masses",
]
