"""Registry of the five benchmark PDE systems.

Each :class:`SystemSpec` fixes the parameter slots with their default ranges and
grid spacing (linear or logarithmic), the solution channels, the default grid
geometry, and the derivative channels used for conditioning. The reaction
diffusion system is an activator/inhibitor pair, both Navier-Stokes variants
evolve scalar vorticity, Korteweg-de Vries is a 1D dispersive wave, and Darcy
flow is a time-independent elliptic problem whose parameter is a coefficient
field rather than a scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidConfigError
from .grid import Grid

SYSTEM_IDS = ("rd2d", "ns2d_unforced", "ns2d_forced", "kdv1d", "darcy2d")

# Forced Navier-Stokes body force: -KF_FORCED * cos(KF_FORCED * y) with linear drag.
ALPHA_DRAG = 0.1
KF_FORCED = 2

# KdV domain length; the IC distribution uses low integer mode counts, so the
# box must be long enough that dispersion acts at soliton scales, not IC scales.
KDV_LENGTH = 128.0


@dataclass(frozen=True)
class SystemSpec:
    system_id: str
    param_names: tuple[str, ...]
    param_ranges: dict[str, tuple[float, float]]
    range_spacing: str  # "linear" | "log"
    channels: tuple[str, ...]
    derivative_channels: tuple[str, ...]
    default_param_counts: dict[str, int]
    constants: dict[str, float] = field(default_factory=dict)
    time_dependent: bool = True

    def __post_init__(self):
        if self.system_id not in SYSTEM_IDS:
            raise InvalidConfigError(f"unknown system_id {self.system_id!r}")
        if self.range_spacing not in ("linear", "log"):
            raise InvalidConfigError(f"range_spacing must be linear or log, got {self.range_spacing!r}")
        if self.system_id != "darcy2d" and not self.param_names:
            raise InvalidConfigError("param_names must be nonempty")

    def default_grid(self, resolution: int | None = None) -> Grid:
        return default_grid(self.system_id, resolution)

    def to_dict(self) -> dict:
        return {
            "system_id": self.system_id,
            "param_names": list(self.param_names),
            "param_ranges": {k: list(v) for k, v in self.param_ranges.items()},
            "range_spacing": self.range_spacing,
            "channels": list(self.channels),
            "constants": dict(self.constants),
            "time_dependent": self.time_dependent,
        }


_SYSTEMS: dict[str, SystemSpec] = {
    "rd2d": SystemSpec(
        system_id="rd2d",
        param_names=("Du", "Dv", "k"),
        param_ranges={"k": (0.005, 0.1), "Du": (0.01, 0.5), "Dv": (0.01, 0.5)},
        range_spacing="linear",
        channels=("u", "v"),
        derivative_channels=("dt_u", "dt_v", "lap_u", "lap_v", "reaction_free"),
        default_param_counts={"k": 2, "Du": 28, "Dv": 27},
    ),
    "ns2d_unforced": SystemSpec(
        system_id="ns2d_unforced",
        param_names=("nu",),
        param_ranges={"nu": (1e-4, 1e-2)},
        range_spacing="log",
        channels=("w",),
        derivative_channels=("dt_w", "lap_w", "adv_w"),
        default_param_counts={"nu": 101},
    ),
    "ns2d_forced": SystemSpec(
        system_id="ns2d_forced",
        param_names=("nu",),
        param_ranges={"nu": (1e-5, 1e-2)},
        range_spacing="log",
        channels=("w",),
        derivative_channels=("dt_w", "lap_w", "adv_w"),
        default_param_counts={"nu": 120},
        constants={"alpha_drag": ALPHA_DRAG, "k_forcing": float(KF_FORCED)},
    ),
    "kdv1d": SystemSpec(
        system_id="kdv1d",
        param_names=("delta",),
        param_ranges={"delta": (0.8, 5.0)},
        range_spacing="linear",
        channels=("u",),
        derivative_channels=("dt_u", "dx_u", "dxxx_u", "u_dx_u"),
        default_param_counts={"delta": 100},
    ),
    "darcy2d": SystemSpec(
        system_id="darcy2d",
        param_names=(),
        param_ranges={},
        range_spacing="linear",
        channels=("u",),
        derivative_channels=("dx_u", "dy_u", "dxx_u", "dyy_u"),
        default_param_counts={},
        constants={"a_low": 3.0, "a_high": 12.0},
        time_dependent=False,
    ),
}


def get_system(system_id: str) -> SystemSpec:
    try:
        return _SYSTEMS[system_id]
    except KeyError:
        raise InvalidConfigError(
            f"unknown system {system_id!r}; expected one of {SYSTEM_IDS}"
        ) from None


def default_grid(system_id: str, resolution: int | None = None) -> Grid:
    """Default output grid geometry for a system at an optional resolution."""
    if system_id == "rd2d":
        n = resolution or 128
        return Grid(shape=(n, n), domain=((-1.0, 1.0), (-1.0, 1.0)),
                    periodic=(False, False), cell_centered=True)
    if system_id == "ns2d_unforced":
        n = resolution or 64
        return Grid.periodic_square(n, 0.0, 1.0)
    if system_id == "ns2d_forced":
        # cos(2y) forcing is exactly periodic on a 2*pi box
        n = resolution or 64
        return Grid.periodic_square(n, 0.0, 2.0 * math.pi)
    if system_id == "kdv1d":
        n = resolution or 256
        return Grid.periodic_line(n, KDV_LENGTH)
    if system_id == "darcy2d":
        n = resolution or 121
        return Grid(shape=(n, n), domain=((0.0, 1.0), (0.0, 1.0)), periodic=(False, False))
    raise InvalidConfigError(f"unknown system {system_id!r}")
