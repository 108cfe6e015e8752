"""Seeded initial-condition and coefficient-field samplers.

Every sampler is a pure function of (config, seed): identical inputs give
bit-identical outputs. Batch jobs derive per-cell child seeds from a master
seed with :func:`derive_child_seed`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, UnsupportedGridError
from .grid import CoefficientField, Field, Grid


def derive_child_seed(master_seed: int, param_idx: int, ic_idx: int) -> int:
    """Stable per-cell seed for batch generation."""
    ss = np.random.SeedSequence([int(master_seed), int(param_idx), int(ic_idx)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def derive_all_seeds(master_seed: int, n_params: int, n_ics: int) -> list[list[int]]:
    """Child seeds for the whole (param, ic) grid, checked for collisions."""
    seeds = [
        [derive_child_seed(master_seed, p, i) for i in range(n_ics)]
        for p in range(n_params)
    ]
    flat = [s for row in seeds for s in row]
    if len(set(flat)) != len(flat):
        raise InvalidConfigError("seed derivation produced a collision; change master_seed")
    return seeds


def _mode_indices(n: int) -> np.ndarray:
    """Signed integer mode indices in FFT order."""
    return np.fft.fftfreq(n, d=1.0 / n)


@dataclass(frozen=True)
class GrfConfig:
    """Spectral Gaussian random field on a periodic grid.

    The spectral weight is a squared exponential over integer mode indices m,
    exp(-(length_scale * |m|)^2 / 2), normalized to unit pointwise variance.
    Larger length scales concentrate energy at longer wavelengths. The mean
    mode is zeroed, so every sample has exactly zero spatial mean.
    """

    grid: Grid
    length_scale: float = 0.8
    variance: float = 1.0

    def __post_init__(self):
        if self.length_scale <= 0:
            raise InvalidConfigError("length_scale must be positive")
        if self.variance <= 0:
            raise InvalidConfigError("variance must be positive")
        if not all(self.grid.periodic):
            raise UnsupportedGridError("GRF sampling requires a fully periodic grid")


def _grf_amplitude(config: GrfConfig) -> np.ndarray:
    shape = config.grid.shape
    if config.grid.ndims == 1:
        m2 = _mode_indices(shape[0]) ** 2
    else:
        mx = _mode_indices(shape[0])[:, None]
        my = _mode_indices(shape[1])[None, :]
        m2 = mx**2 + my**2
    amp = np.exp(-(config.length_scale**2) * m2 / 4.0)  # sqrt of the spectral density
    amp.flat[0] = 0.0
    total = np.sum(amp**2)
    n_total = float(np.prod(shape))
    # Var[Re ifft(xi * amp)] = sum(amp^2) / N^2 for unit complex-normal xi
    amp *= np.sqrt(config.variance * n_total**2 / total)
    return amp


def sample_grf(config: GrfConfig, seed: int) -> Field:
    """Zero-mean stationary Gaussian field realized spectrally."""
    rng = np.random.default_rng(seed)
    shape = config.grid.shape
    xi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec = xi * _grf_amplitude(config)
    vals = np.fft.ifftn(spec).real
    return Field(grid=config.grid, channels=("g",), values=vals[None])


@dataclass(frozen=True)
class KdvIcConfig:
    """Truncated random sine series on a periodic line of length L.

    Amplitudes and phases are U(0, 1) (phases in radians by default; set
    phase_in_turns to scale them by 2*pi), and frequencies are U(1, 3) rounded
    to the nearest integer so the sample is exactly periodic.
    """

    grid: Grid
    n_modes: int = 10
    phase_in_turns: bool = False

    def __post_init__(self):
        if self.n_modes < 1:
            raise InvalidConfigError("n_modes must be at least 1")
        if self.grid.ndims != 1 or not self.grid.periodic[0]:
            raise UnsupportedGridError("KdV ICs require a 1D periodic grid")


def sample_kdv_ic(config: KdvIcConfig, seed: int) -> Field:
    rng = np.random.default_rng(seed)
    length = config.grid.lengths[0]
    x = config.grid.axis_coords(0) - config.grid.domain[0][0]
    amps = rng.uniform(0.0, 1.0, size=config.n_modes)
    phases = rng.uniform(0.0, 1.0, size=config.n_modes)
    if config.phase_in_turns:
        phases = phases * 2.0 * np.pi
    freqs = np.rint(rng.uniform(1.0, 3.0, size=config.n_modes))
    u0 = np.zeros_like(x)
    for a, l, phi in zip(amps, freqs, phases):
        u0 += a * np.sin(2.0 * np.pi * l * x / length + phi)
    return Field(grid=config.grid, channels=("u",), values=u0[None])


def kdv_ic_from_modes(grid: Grid, amps, freqs, phases) -> Field:
    """Deterministic sine superposition; test hook bypassing the sampler RNG."""
    length = grid.lengths[0]
    x = grid.axis_coords(0) - grid.domain[0][0]
    u0 = np.zeros_like(x)
    for a, l, phi in zip(amps, freqs, phases):
        u0 += a * np.sin(2.0 * np.pi * l * x / length + phi)
    return Field(grid=grid, channels=("u",), values=u0[None])


def sample_darcy_coeff(grid: Grid, seed: int) -> CoefficientField:
    """Two-level piecewise-constant coefficient from a thresholded Gaussian.

    The latent field is sampled spectrally with amplitude (|k|^2 + 9)^-1 on
    angular wavenumbers k (a periodic surrogate of the inverse squared
    Helmholtz covariance), then mapped pointwise to 12 where nonnegative and
    3 elsewhere.
    """
    if grid.ndims != 2:
        raise UnsupportedGridError("Darcy coefficients require a 2D grid")
    rng = np.random.default_rng(seed)
    nx, ny = grid.shape
    lx, ly = grid.lengths
    kx = 2.0 * np.pi * _mode_indices(nx)[:, None] / lx
    ky = 2.0 * np.pi * _mode_indices(ny)[None, :] / ly
    amp = 1.0 / (kx**2 + ky**2 + 9.0)
    xi = rng.standard_normal((nx, ny)) + 1j * rng.standard_normal((nx, ny))
    latent = np.fft.ifft2(xi * amp).real
    vals = np.where(latent >= 0.0, 12.0, 3.0)
    return CoefficientField(grid=grid, values=vals)
