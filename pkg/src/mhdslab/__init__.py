"""Pseudo-spectral simulator and analysis toolkit for anisotropic incompressible
MHD near a background magnetic field on a slip-boundary slab."""

from .grid import Parity, SpectralGrid, dealias, forward, inverse, make_grid, set_workers
from .fields import Field, VectorField, advect, curl, derivative, divergence, leray_project
from .solver import BlowUpError, MhdState, ModelVariant, rhs, run, step, vorticity_residual

__all__ = [
    "Parity", "SpectralGrid", "make_grid", "forward", "inverse", "dealias",
    "set_workers",
    "Field", "VectorField", "derivative", "divergence", "curl", "leray_project",
    "advect",
    "ModelVariant", "MhdState", "rhs", "step", "run", "vorticity_residual",
    "BlowUpError",
]
