"""Finite-difference PDE residuals in torch, differentiable in the parameter.

The stencils mirror the benchmark's conventions exactly: central first and
second differences with periodic wrap (one-sided second order at walls), the
third derivative as three repeated central first differences, and a
first-order forward time difference aligned to the earlier frame. All
arithmetic stays in float32 so the loss matches the generator's residual on
identical windows to float precision.
"""

from __future__ import annotations

import torch


def _take(a: torch.Tensor, axis: int, i) -> torch.Tensor:
    return a.narrow(axis, i % a.shape[axis] if isinstance(i, int) else i, 1)


def d1(a: torch.Tensor, dx: float, axis: int, periodic: bool) -> torch.Tensor:
    if periodic:
        return (torch.roll(a, -1, dims=axis) - torch.roll(a, 1, dims=axis)) / (2.0 * dx)
    n = a.shape[axis]
    t = lambda i: _take(a, axis, i)
    mid = (a.narrow(axis, 2, n - 2) - a.narrow(axis, 0, n - 2)) / (2.0 * dx)
    lo = (-3.0 * t(0) + 4.0 * t(1) - t(2)) / (2.0 * dx)
    hi = (3.0 * t(n - 1) - 4.0 * t(n - 2) + t(n - 3)) / (2.0 * dx)
    return torch.cat([lo, mid, hi], dim=axis)


def d2(a: torch.Tensor, dx: float, axis: int, periodic: bool) -> torch.Tensor:
    if periodic:
        return (torch.roll(a, -1, dims=axis) - 2.0 * a + torch.roll(a, 1, dims=axis)) / dx**2
    n = a.shape[axis]
    t = lambda i: _take(a, axis, i)
    mid = (a.narrow(axis, 2, n - 2) - 2.0 * a.narrow(axis, 1, n - 2)
           + a.narrow(axis, 0, n - 2)) / dx**2
    lo = (2.0 * t(0) - 5.0 * t(1) + 4.0 * t(2) - t(3)) / dx**2
    hi = (2.0 * t(n - 1) - 5.0 * t(n - 2) + 4.0 * t(n - 3) - t(n - 4)) / dx**2
    return torch.cat([lo, mid, hi], dim=axis)


def d3(a: torch.Tensor, dx: float, axis: int, periodic: bool) -> torch.Tensor:
    out = a
    for _ in range(3):
        out = d1(out, dx, axis, periodic)
    return out


def derivative_channels(system_id: str, frames: torch.Tensor, dts: torch.Tensor,
                        spacing, periodic) -> torch.Tensor:
    """Conditioning channels of the earlier frame, stacked along channel dim.

    frames: [t, c, x(, y)]; returns [n_deriv, x(, y)] for the 2-frame window.
    """
    if system_id == "kdv1d":
        u0, u1 = frames[0, 0], frames[1, 0]
        dt_u = (u1 - u0) / dts[0]
        dx = spacing[0]
        dx_u = d1(u0, dx, 0, periodic[0])
        dxxx_u = d3(u0, dx, 0, periodic[0])
        return torch.stack([dt_u, dx_u, dxxx_u, u0 * dx_u])
    if system_id == "rd2d":
        u0, v0 = frames[0, 0], frames[0, 1]
        dt_u = (frames[1, 0] - u0) / dts[0]
        dt_v = (frames[1, 1] - v0) / dts[0]
        lap_u = d2(u0, spacing[0], 0, periodic[0]) + d2(u0, spacing[1], 1, periodic[1])
        lap_v = d2(v0, spacing[0], 0, periodic[0]) + d2(v0, spacing[1], 1, periodic[1])
        reaction_free = dt_u - (u0 - u0**3 - v0)
        return torch.stack([dt_u, dt_v, lap_u, lap_v, reaction_free])
    raise ValueError(f"derivative channels not implemented for {system_id!r}")


def kdv_residual_norm(frames: torch.Tensor, dts: torch.Tensor, delta: torch.Tensor,
                      dx: float) -> torch.Tensor:
    """Mean squared dispersive-wave residual of a 2-frame window.

    Differentiable with respect to delta. frames: [t, 1, n] float32.
    """
    u0 = frames[0, 0]
    dt_u = (frames[1, 0] - u0) / dts[0]
    dx_u = d1(u0, dx, 0, True)
    dxxx_u = d3(u0, dx, 0, True)
    res = dt_u + u0 * dx_u + delta**2 * dxxx_u
    return (res**2).mean()


def rd_residual_norm(frames: torch.Tensor, dts: torch.Tensor, params: dict,
                     spacing, target: str, value: torch.Tensor) -> torch.Tensor:
    """Mean squared activator/inhibitor residual over interior points."""
    u0, v0 = frames[0, 0], frames[0, 1]
    dt_u = (frames[1, 0] - u0) / dts[0]
    dt_v = (frames[1, 1] - v0) / dts[0]
    lap_u = d2(u0, spacing[0], 0, False) + d2(u0, spacing[1], 1, False)
    lap_v = d2(v0, spacing[0], 0, False) + d2(v0, spacing[1], 1, False)
    vals = {k: torch.as_tensor(v, dtype=torch.float32) for k, v in params.items()}
    vals[target] = value
    f_u = dt_u - vals["Du"] * lap_u - (u0 - u0**3 - vals["k"] - v0)
    f_v = dt_v - vals["Dv"] * lap_v - (u0 - v0)
    res = torch.stack([f_u, f_v])[:, 1:-1, 1:-1]
    return (res**2).mean()


def residual_norm(system_id: str, frames: torch.Tensor, dts: torch.Tensor,
                  value: torch.Tensor, spacing, periodic,
                  known: dict | None = None, target: str = "") -> torch.Tensor:
    if system_id == "kdv1d":
        return kdv_residual_norm(frames, dts, value, spacing[0])
    if system_id == "rd2d":
        return rd_residual_norm(frames, dts, known or {}, spacing, target, value)
    raise ValueError(f"residual not implemented for {system_id!r}")
