"""Pseudo-spectral lab for the 2D two-phase model H system."""

from modelh.spectral import (
    Grid,
    SpectralScalar,
    SpectralVector,
    State,
    dealias_product,
    gradient,
    divergence,
    laplacian,
    bilaplacian,
    leray_project,
    inner,
    norm,
    read_checkpoint,
    write_checkpoint,
)
from modelh.potential import PolynomialPotential, double_well
from modelh.forcing import ForcingSymbol, solenoidal_profile
from modelh.stepper import SolverParams, EnergyReport, compute_mu, step, run, energy_report

__all__ = [
    "Grid", "SpectralScalar", "SpectralVector", "State",
    "dealias_product", "gradient", "divergence", "laplacian", "bilaplacian",
    "leray_project", "inner", "norm", "read_checkpoint", "write_checkpoint",
    "PolynomialPotential", "double_well",
    "ForcingSymbol", "solenoidal_profile",
    "SolverParams", "EnergyReport", "compute_mu", "step", "run", "energy_report",
]
