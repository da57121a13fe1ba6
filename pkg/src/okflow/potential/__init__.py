"""Nonlocal potentials and energies for the logarithmic, Riesz and torus kernels."""

from .api import (
    EnergyBreakdown,
    PotentialResult,
    boundary_stats,
    fan_nodes,
    nonlocal_energy,
    potential,
    potential_plane,
    potential_torus,
    total_energy,
)
from .kernels import Kernel, KernelError
from .torus import RasterError, rasterize, sample, solve_poisson, spectral_residual

__all__ = [name for name in dir() if not name.startswith("_")]
