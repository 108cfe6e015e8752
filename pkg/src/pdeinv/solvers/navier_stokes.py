"""Pseudo-spectral vorticity solvers for the two Navier-Stokes systems.

The vorticity equation dw/dt + u.grad(w) = nu*lap(w) [+ f - alpha*w] is
advanced in Fourier space with an IMEX scheme: Crank-Nicolson on the viscous
term and second-order Adams-Bashforth (Euler on the first step) on everything
explicit (advection, forcing, drag). Velocity is recovered from vorticity
through the streamfunction each step; nonlinear products are formed
pseudo-spectrally with a 2/3-rule dealiasing mask.

The fixed step is snapped so that an integer number of steps lands exactly on
every recording time, which keeps recorded frames reproducible bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError, InvalidConfigError, UnsupportedGridError
from ..grid import Field, Grid, Trajectory
from ..systems import ALPHA_DRAG, KF_FORCED
from .config import SolverConfig
from .spectral import dealias_mask, downsample


def _internal_grid(ic_grid: Grid, config: SolverConfig) -> Grid:
    n = config.internal_resolution
    if len(n) != 2:
        raise InvalidConfigError("Navier-Stokes solvers need a 2D internal resolution")
    return Grid(shape=tuple(n), domain=ic_grid.domain, periodic=(True, True))


def _spectral_resize(vals: np.ndarray, n_out: tuple[int, int]) -> np.ndarray:
    """Exact Fourier interpolation between periodic square resolutions."""
    n_in = vals.shape
    if n_in == tuple(n_out):
        return vals
    spec = np.fft.fftshift(np.fft.fft2(vals))
    out = np.zeros(n_out, dtype=complex)
    lo = min(n_in[0], n_out[0])
    s_in = (n_in[0] - lo) // 2
    s_out = (n_out[0] - lo) // 2
    out[s_out : s_out + lo, s_out : s_out + lo] = spec[s_in : s_in + lo, s_in : s_in + lo]
    scale = (n_out[0] * n_out[1]) / (n_in[0] * n_in[1])
    return np.fft.ifft2(np.fft.ifftshift(out)).real * scale


def _solve_vorticity(
    ic_w: Field,
    nu: float,
    config: SolverConfig,
    forcing: np.ndarray | None,
    alpha: float,
) -> Trajectory:
    if ic_w.grid.ndims != 2 or not all(ic_w.grid.periodic):
        raise UnsupportedGridError("vorticity solver requires a periodic 2D grid")
    if nu <= 0:
        raise InvalidConfigError("viscosity must be positive")
    if config.dt is None:
        raise InvalidConfigError("vorticity solver uses a fixed dt")

    grid = _internal_grid(ic_w.grid, config)
    nx, ny = grid.shape
    lx, ly = grid.lengths
    w = _spectral_resize(ic_w.values[0].astype(np.float64), grid.shape)

    kx = (2.0 * np.pi / lx) * np.fft.fftfreq(nx, d=1.0 / nx)[:, None]
    ky = (2.0 * np.pi / ly) * np.fft.rfftfreq(ny, d=1.0 / ny)[None, :]
    k2 = kx**2 + ky**2
    inv_k2 = np.zeros_like(k2)
    inv_k2[k2 > 0] = 1.0 / k2[k2 > 0]
    mask = dealias_mask(grid.shape, rfft_last=True) if config.dealias else None

    f_hat = np.fft.rfft2(forcing) if forcing is not None else None

    # integer steps per recording interval, dt snapped to land on record times
    n_sub = max(1, round(config.record_interval_s / config.dt))
    dt = config.record_interval_s / n_sub
    n_burn = int(np.ceil(config.burn_in_s / dt - 1e-9)) if config.burn_in_s > 0 else 0
    n_frames = config.n_frames

    w_hat = np.fft.rfft2(w)
    # linear terms (viscosity and drag) integrate implicitly by Crank-Nicolson
    cn_minus = 1.0 - 0.5 * dt * (nu * k2 + alpha)
    cn_plus = 1.0 + 0.5 * dt * (nu * k2 + alpha)

    def explicit_term(wh):
        psi_hat = wh * inv_k2
        ux = np.fft.irfft2(1j * ky * psi_hat, s=grid.shape)
        uy = np.fft.irfft2(-1j * kx * psi_hat, s=grid.shape)
        wx = np.fft.irfft2(1j * kx * wh, s=grid.shape)
        wy = np.fft.irfft2(1j * ky * wh, s=grid.shape)
        n_hat = -np.fft.rfft2(ux * wx + uy * wy)
        if mask is not None:
            n_hat = n_hat * mask
        if f_hat is not None:
            n_hat = n_hat + f_hat
        n_hat[0, 0] = 0.0  # mean vorticity stays pinned at zero
        return n_hat

    frames = np.empty((n_frames,) + grid.shape, dtype=np.float64)
    n_prev = None
    step = 0
    total_steps = n_burn + (n_frames - 1) * n_sub
    next_record = n_burn
    frame_idx = 0
    with np.errstate(over="ignore", invalid="ignore"):  # blow-ups raise below
        while True:
            if step == next_record:
                w = np.fft.irfft2(w_hat, s=grid.shape)
                if not np.all(np.isfinite(w)):
                    raise DivergenceError(
                        f"non-finite vorticity at t={step * dt:.6g}s", time=step * dt
                    )
                frames[frame_idx] = w
                frame_idx += 1
                if frame_idx == n_frames:
                    break
                next_record += n_sub
            n_cur = explicit_term(w_hat)
            if n_prev is None:
                rhs = n_cur
            else:
                rhs = 1.5 * n_cur - 0.5 * n_prev
            w_hat = (w_hat * cn_minus + dt * rhs) / cn_plus
            n_prev = n_cur
            step += 1
            if step > total_steps:
                raise DivergenceError(
                    "recording loop overran its step budget", time=step * dt
                )

    traj = Trajectory(
        grid=grid,
        channels=("w",),
        times=np.asarray(config.record_times()),
        values=frames[:, None, :, :],
    )
    factor = grid.shape[0] // config.output_resolution[0]
    return downsample(traj, factor, method="stride")


def solve_ns_unforced(ic_w: Field, nu: float, config: SolverConfig) -> Trajectory:
    """Decaying 2D turbulence in vorticity form."""
    return _solve_vorticity(ic_w, nu, config, forcing=None, alpha=0.0)


def kolmogorov_forcing(grid: Grid) -> np.ndarray:
    """-k*cos(k*y) body force on the fixed forcing wavenumber."""
    y = grid.coords()[1]
    kf = KF_FORCED * 2.0 * np.pi / grid.lengths[1]
    return -KF_FORCED * np.cos(kf * y)


def solve_ns_forced(ic_w: Field, nu: float, config: SolverConfig) -> Trajectory:
    """Kolmogorov flow: forced 2D turbulence with linear drag."""
    grid = _internal_grid(ic_w.grid, config)
    return _solve_vorticity(
        ic_w, nu, config, forcing=kolmogorov_forcing(grid), alpha=ALPHA_DRAG
    )


def laminar_forced_vorticity(grid: Grid, nu: float) -> Field:
    """Steady laminar vorticity of the forced system: balances forcing,
    viscosity and drag with no advection."""
    y = grid.coords()[1]
    kf = KF_FORCED * 2.0 * np.pi / grid.lengths[1]
    amp = -KF_FORCED / (nu * kf**2 + ALPHA_DRAG)
    return Field(grid=grid, channels=("w",), values=(amp * np.cos(kf * y))[None])
