"""Finite-difference derivative stacks and pointwise PDE residuals.

Spatial derivatives are central differences (periodic wrap on periodic axes,
one-sided second order at non-periodic boundaries); the third derivative is
three applications of the central first difference. The time derivative is a
first-order forward difference between consecutive recorded frames, aligned to
the earlier frame, so a window of T frames yields T-1 residual time slots and
the default 2-frame window yields one.

Residual norms are means of the squared residual over channels and grid
points, restricted to interior points on non-periodic grids, which makes the
magnitudes comparable across resolutions and systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientWindowError, InvalidConfigError, InvalidParamsError
from .grid import CoefficientField, Field, Grid, ParamVector, Trajectory
from .solvers.darcy import darcy_flux_residual
from .solvers.navier_stokes import kolmogorov_forcing
from .solvers.spectral import velocity_from_vorticity
from .systems import ALPHA_DRAG, SystemSpec


def d1(a: np.ndarray, dx: float, axis: int, periodic: bool) -> np.ndarray:
    """Central first difference; one-sided second order at non-periodic edges."""
    if periodic:
        return (np.roll(a, -1, axis=axis) - np.roll(a, 1, axis=axis)) / (2.0 * dx)
    return np.gradient(a, dx, axis=axis, edge_order=2)


def d2(a: np.ndarray, dx: float, axis: int, periodic: bool) -> np.ndarray:
    """Central second difference; one-sided second order at non-periodic edges."""
    if periodic:
        return (np.roll(a, -1, axis=axis) - 2.0 * a + np.roll(a, 1, axis=axis)) / dx**2

    def take(idx) -> np.ndarray:
        s = [slice(None)] * a.ndim
        s[axis] = idx
        return a[tuple(s)]

    out = np.empty_like(a)
    mid = [slice(None)] * a.ndim
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (take(slice(2, None)) - 2.0 * take(slice(1, -1))
                       + take(slice(0, -2))) / dx**2
    # quadratic-fit one-sided stencils at the two boundary layers
    edge = [slice(None)] * a.ndim
    edge[axis] = 0
    out[tuple(edge)] = (2.0 * take(0) - 5.0 * take(1) + 4.0 * take(2) - take(3)) / dx**2
    edge[axis] = -1
    out[tuple(edge)] = (2.0 * take(-1) - 5.0 * take(-2) + 4.0 * take(-3) - take(-4)) / dx**2
    return out


def d3(a: np.ndarray, dx: float, axis: int, periodic: bool) -> np.ndarray:
    """Third derivative as three repeated central first differences."""
    out = a
    for _ in range(3):
        out = d1(out, dx, axis, periodic)
    return out


@dataclass(frozen=True)
class DerivativeStack:
    """Per-system conditioning channels over a trajectory window."""

    grid: Grid
    channels: tuple[str, ...]
    values: np.ndarray  # [time_slot, channel, x(, y)]
    valid_times: np.ndarray  # timestamps of the earlier frame of each slot
    frames: np.ndarray  # solution values at the earlier frames [slot, channel, ...]
    frame_channels: tuple[str, ...]

    def channel(self, name: str) -> np.ndarray:
        return self.values[:, self.channels.index(name)]

    def frame_channel(self, name: str) -> np.ndarray:
        return self.frames[:, self.frame_channels.index(name)]


def compute_derivatives(window: Trajectory, system: SystemSpec) -> DerivativeStack:
    sid = system.system_id
    grid = window.grid
    if sid == "darcy2d":
        return _darcy_stack(window, system)
    if window.n_frames < 2:
        raise InsufficientWindowError(
            f"{sid} needs at least 2 frames for the time derivative, got {window.n_frames}"
        )
    vals = window.values.astype(np.float64)
    dts = np.diff(window.times).reshape((-1,) + (1,) * (vals.ndim - 1))
    slots = window.n_frames - 1
    earlier = vals[:-1]
    dt_all = (vals[1:] - earlier) / dts
    spacing = grid.spacing
    per = grid.periodic

    if sid == "rd2d":
        u = earlier[:, 0]
        v = earlier[:, 1]
        lap_u = d2(u, spacing[0], 1, per[0]) + d2(u, spacing[1], 2, per[1])
        lap_v = d2(v, spacing[0], 1, per[0]) + d2(v, spacing[1], 2, per[1])
        reaction_free = dt_all[:, 0] - (u - u**3 - v)
        stack = np.stack([dt_all[:, 0], dt_all[:, 1], lap_u, lap_v, reaction_free], axis=1)
    elif sid in ("ns2d_unforced", "ns2d_forced"):
        w = earlier[:, 0]
        lap_w = d2(w, spacing[0], 1, per[0]) + d2(w, spacing[1], 2, per[1])
        wx = d1(w, spacing[0], 1, per[0])
        wy = d1(w, spacing[1], 2, per[1])
        adv = np.empty_like(w)
        for s in range(slots):
            vel = velocity_from_vorticity(
                Field(grid=grid, channels=("w",), values=w[s][None])
            )
            adv[s] = vel.channel("u_x") * wx[s] + vel.channel("u_y") * wy[s]
        stack = np.stack([dt_all[:, 0], lap_w, adv], axis=1)
    elif sid == "kdv1d":
        u = earlier[:, 0]
        dx_u = d1(u, spacing[0], 1, per[0])
        dxxx_u = d3(u, spacing[0], 1, per[0])
        stack = np.stack([dt_all[:, 0], dx_u, dxxx_u, u * dx_u], axis=1)
    else:
        raise InvalidConfigError(f"unknown system {sid!r}")

    return DerivativeStack(
        grid=grid,
        channels=system.derivative_channels,
        values=stack,
        valid_times=window.times[:-1],
        frames=earlier,
        frame_channels=window.channels,
    )


def _darcy_stack(window: Trajectory, system: SystemSpec) -> DerivativeStack:
    vals = window.values.astype(np.float64)
    u = vals[:, 0]
    spacing = window.grid.spacing
    per = window.grid.periodic
    stack = np.stack(
        [
            d1(u, spacing[0], 1, per[0]),
            d1(u, spacing[1], 2, per[1]),
            d2(u, spacing[0], 1, per[0]),
            d2(u, spacing[1], 2, per[1]),
        ],
        axis=1,
    )
    return DerivativeStack(
        grid=window.grid,
        channels=system.derivative_channels,
        values=stack,
        valid_times=window.times,
        frames=vals,
        frame_channels=window.channels,
    )


def _require_params(phi: ParamVector, names: tuple[str, ...]) -> None:
    missing = [n for n in names if not phi.has(n)]
    if missing:
        raise InvalidParamsError(f"parameter slots missing: {missing}")


def _residual_slots(
    window: Trajectory,
    phi: ParamVector | None,
    system: SystemSpec,
    coeff: CoefficientField | None = None,
    stack: DerivativeStack | None = None,
) -> np.ndarray:
    """Pointwise residual, shaped [slot, equation_channel, x(, y)]."""
    sid = system.system_id
    if sid == "darcy2d":
        if coeff is None:
            raise InvalidParamsError("darcy residual needs the coefficient field")
        out = np.empty((window.n_frames, 1) + tuple(n - 2 for n in window.grid.shape))
        for s in range(window.n_frames):
            out[s, 0] = darcy_flux_residual(
                window.values[s, 0].astype(np.float64),
                coeff.values.astype(np.float64),
                window.grid,
            )
        return out
    if phi is None:
        raise InvalidParamsError("residual needs a parameter vector")
    if stack is None:
        stack = compute_derivatives(window, system)

    if sid == "rd2d":
        _require_params(phi, ("Du", "Dv", "k"))
        u = stack.frame_channel("u")
        v = stack.frame_channel("v")
        f_u = stack.channel("dt_u") - phi.get("Du") * stack.channel("lap_u") - (
            u - u**3 - phi.get("k") - v
        )
        f_v = stack.channel("dt_v") - phi.get("Dv") * stack.channel("lap_v") - (u - v)
        return np.stack([f_u, f_v], axis=1)
    if sid == "ns2d_unforced":
        _require_params(phi, ("nu",))
        f = stack.channel("dt_w") + stack.channel("adv_w") - phi.get("nu") * stack.channel("lap_w")
        return f[:, None]
    if sid == "ns2d_forced":
        _require_params(phi, ("nu",))
        forcing = kolmogorov_forcing(window.grid)
        w = stack.frame_channel("w")
        f = (
            stack.channel("dt_w")
            + stack.channel("adv_w")
            - phi.get("nu") * stack.channel("lap_w")
            - forcing
            + ALPHA_DRAG * w
        )
        return f[:, None]
    if sid == "kdv1d":
        _require_params(phi, ("delta",))
        f = (
            stack.channel("dt_u")
            + stack.channel("u_dx_u")
            + phi.get("delta") ** 2 * stack.channel("dxxx_u")
        )
        return f[:, None]
    raise InvalidConfigError(f"unknown system {sid!r}")


def _interior(values: np.ndarray, grid: Grid, already_interior: bool) -> np.ndarray:
    """Trim one boundary layer on non-periodic axes before norm-taking."""
    if already_interior or all(grid.periodic):
        return values
    sl = [slice(None), slice(None)]
    for per in grid.periodic:
        sl.append(slice(None) if per else slice(1, -1))
    return values[tuple(sl)]


def residual_field(
    window: Trajectory,
    phi: ParamVector | None,
    system: SystemSpec,
    coeff: CoefficientField | None = None,
) -> Field | Trajectory:
    """Pointwise residual; a Field for single-slot windows, else a Trajectory.

    For darcy the residual lives on interior nodes only, returned on the
    correspondingly shrunk grid.
    """
    slots = _residual_slots(window, phi, system, coeff)
    grid = window.grid
    if system.system_id == "darcy2d":
        lo = [d[0] for d in grid.domain]
        hi = [d[1] for d in grid.domain]
        sp = grid.spacing
        grid = Grid(
            shape=tuple(n - 2 for n in grid.shape),
            domain=tuple((lo[i] + sp[i], hi[i] - sp[i]) for i in range(grid.ndims)),
            periodic=grid.periodic,
        )
    names = tuple(f"res_{c}" for c in system.channels)
    if slots.shape[0] == 1:
        return Field(grid=grid, channels=names, values=slots[0])
    times = window.times[:-1] if system.time_dependent else window.times
    return Trajectory(grid=grid, channels=names, times=times, values=slots)


def residual_norm(
    window: Trajectory,
    phi: ParamVector | None,
    system: SystemSpec,
    coeff: CoefficientField | None = None,
    stack: DerivativeStack | None = None,
) -> float:
    """Mean squared residual over interior points, channels and time slots."""
    slots = _residual_slots(window, phi, system, coeff, stack)
    slots = _interior(slots, window.grid, already_interior=system.system_id == "darcy2d")
    return float(np.mean(slots**2))


def residual_affine(
    window: Trajectory,
    system: SystemSpec,
    known: ParamVector,
    target: str,
    stack: DerivativeStack | None = None,
) -> tuple[np.ndarray, np.ndarray, str]:
    """Decompose the residual as F0 + theta*F1 in the target parameter.

    Every scalar slot enters the residual linearly; for kdv the linear variable
    is delta squared, flagged by the returned kind ("value" or "squared").
    Arrays are interior-trimmed and ready for least squares.
    """
    if target not in system.param_names:
        raise InvalidParamsError(f"{target!r} is not a parameter of {system.system_id}")
    if stack is None:
        stack = compute_derivatives(window, system)
    kind = "squared" if (system.system_id == "kdv1d" and target == "delta") else "value"

    def at(theta: float) -> np.ndarray:
        value = np.sqrt(theta) if kind == "squared" else theta
        phi = known.with_value(target, value)
        return _residual_slots(window, phi, system, stack=stack)

    f0 = at(0.0)
    f1 = at(1.0) - f0
    f0 = _interior(f0, window.grid, already_interior=False)
    f1 = _interior(f1, window.grid, already_interior=False)
    return f0, f1, kind
