"""Spectral helpers shared by the periodic solvers and diagnostics."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import InvalidConfigError, UnsupportedGridError
from ..grid import Field, Grid, Trajectory


class NonzeroMeanVorticityWarning(UserWarning):
    """Raised when a vorticity field has a nonzero mean that must be projected out."""


def angular_wavenumbers(grid: Grid) -> tuple[np.ndarray, ...]:
    """Angular wavenumbers 2*pi*m/L per axis, in FFT order, broadcastable."""
    if not all(grid.periodic):
        raise UnsupportedGridError("wavenumbers require a fully periodic grid")
    out = []
    for axis in range(grid.ndims):
        n = grid.shape[axis]
        length = grid.lengths[axis]
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n) / length
        shape = [1] * grid.ndims
        shape[axis] = n
        out.append(k.reshape(shape))
    return tuple(out)


def velocity_from_vorticity(w: Field) -> Field:
    """Recover the divergence-free velocity from scalar vorticity.

    Inverts the streamfunction relation lap(psi) = -w spectrally and returns
    u = (d_y psi, -d_x psi), so that w = d_x u_y - d_y u_x. The mean vorticity
    mode carries no velocity; a nonzero mean is projected out with a warning.
    """
    if w.grid.ndims != 2 or not all(w.grid.periodic):
        raise UnsupportedGridError("vorticity inversion requires a periodic 2D grid")
    vals = w.values[0].astype(np.float64)
    mean = float(vals.mean())
    if abs(mean) > 1e-12 * max(1.0, float(np.abs(vals).max())):
        warnings.warn(
            f"vorticity has nonzero mean {mean:.3e}; projecting it out",
            NonzeroMeanVorticityWarning,
            stacklevel=2,
        )
    kx, ky = angular_wavenumbers(w.grid)
    k2 = kx**2 + ky**2
    w_hat = np.fft.fft2(vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi_hat = np.where(k2 > 0, w_hat / np.where(k2 > 0, k2, 1.0), 0.0)
    ux = np.fft.ifft2(1j * ky * psi_hat).real
    uy = np.fft.ifft2(-1j * kx * psi_hat).real
    return Field(grid=w.grid, channels=("u_x", "u_y"), values=np.stack([ux, uy]))


def dealias_mask(shape: tuple[int, ...], rfft_last: bool = False) -> np.ndarray:
    """Two-thirds-rule mask over FFT-ordered integer modes."""
    masks = []
    for axis, n in enumerate(shape):
        cutoff = n // 3
        if rfft_last and axis == len(shape) - 1:
            m = np.arange(n // 2 + 1)
        else:
            m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        keep = m <= cutoff
        s = [1] * len(shape)
        s[axis] = keep.size
        masks.append(keep.reshape(s))
    out = masks[0]
    for m in masks[1:]:
        out = out & m
    return out


def _coarse_indices(n_fine: int, factor: int, method: str, cell_centered: bool,
                    periodic: bool) -> np.ndarray:
    if method == "stride":
        return np.arange(0, n_fine, factor)
    # nearest: coarse sample locations mapped to the closest fine index
    n_coarse = n_fine // factor
    if periodic or not cell_centered:
        pos = np.arange(n_coarse) * factor
    else:
        pos = np.rint((np.arange(n_coarse) + 0.5) * factor - 0.5).astype(int)
    return np.clip(pos, 0, n_fine - 1)


def downsample(traj: Trajectory, factor: int, method: str = "stride") -> Trajectory:
    """Spatial subsampling by an integer factor; timestamps unchanged."""
    if method not in ("stride", "nearest"):
        raise InvalidConfigError(f"unknown downsample method {method!r}")
    if factor < 1:
        raise InvalidConfigError("factor must be >= 1")
    if factor == 1:
        return traj
    grid = traj.grid
    new_shape = []
    indices = []
    for axis, n in enumerate(grid.shape):
        if grid.periodic[axis] or grid.cell_centered:
            if n % factor != 0:
                raise InvalidConfigError(f"factor {factor} does not divide axis size {n}")
            new_shape.append(n // factor)
        else:
            if (n - 1) % factor != 0:
                raise InvalidConfigError(
                    f"factor {factor} does not divide vertex axis intervals {n - 1}"
                )
            new_shape.append((n - 1) // factor + 1)
        idx = _coarse_indices(n, factor, method, grid.cell_centered, grid.periodic[axis])
        if not grid.periodic[axis] and not grid.cell_centered:
            idx = np.arange(0, n, factor)  # vertex grids keep both endpoints
        indices.append(idx)
    vals = traj.values
    vals = vals[:, :, indices[0]]
    if grid.ndims == 2:
        vals = vals[:, :, :, indices[1]]
    new_grid = Grid(
        shape=tuple(new_shape),
        domain=grid.domain,
        periodic=grid.periodic,
        cell_centered=grid.cell_centered,
    )
    return Trajectory(grid=new_grid, channels=traj.channels, times=traj.times, values=vals)


def downsample_field(f: Field, factor: int, method: str = "stride") -> Field:
    traj = Trajectory(grid=f.grid, channels=f.channels, times=np.array([0.0]),
                      values=f.values[None])
    out = downsample(traj, factor, method)
    return Field(grid=out.grid, channels=out.channels, values=out.values[0])
