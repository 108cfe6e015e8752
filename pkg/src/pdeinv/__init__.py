"""PDE inverse-problem benchmark engine.

Five synthetic PDE systems (reaction diffusion, unforced and forced 2D
Navier-Stokes, Korteweg-de Vries, Darcy flow) with seeded dataset generation,
evaluation splits, finite-difference residuals, residual-minimizing classical
parameter estimators, degradation operators, spectra, and scoring metrics.
"""

from .grid import CoefficientField, Field, Grid, ParamVector, Trajectory, single_param
from .io import (
    DatasetManifest,
    SplitAssignment,
    read_manifest,
    read_trajectory,
    validate_manifest,
    write_manifest,
    write_trajectory,
)
from .systems import SystemSpec, default_grid, get_system

__version__ = "0.1.0"

__all__ = [
    "CoefficientField",
    "DatasetManifest",
    "Field",
    "Grid",
    "ParamVector",
    "SplitAssignment",
    "SystemSpec",
    "Trajectory",
    "default_grid",
    "get_system",
    "read_manifest",
    "read_trajectory",
    "single_param",
    "validate_manifest",
    "write_manifest",
    "write_trajectory",
    "__version__",
]
