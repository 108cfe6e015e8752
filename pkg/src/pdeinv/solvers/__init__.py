from .config import SolverConfig, desk_config, reference_config
from .darcy import darcy_flux_residual, solve_darcy
from .kdv import soliton, solve_kdv
from .navier_stokes import (
    kolmogorov_forcing,
    laminar_forced_vorticity,
    solve_ns_forced,
    solve_ns_unforced,
)
from .reaction_diffusion import solve_rd
from .spectral import (
    angular_wavenumbers,
    dealias_mask,
    downsample,
    downsample_field,
    velocity_from_vorticity,
)

__all__ = [
    "SolverConfig",
    "desk_config",
    "reference_config",
    "solve_darcy",
    "darcy_flux_residual",
    "solve_kdv",
    "soliton",
    "solve_ns_forced",
    "solve_ns_unforced",
    "kolmogorov_forcing",
    "laminar_forced_vorticity",
    "solve_rd",
    "angular_wavenumbers",
    "dealias_mask",
    "downsample",
    "downsample_field",
    "velocity_from_vorticity",
]
