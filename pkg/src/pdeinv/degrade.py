"""Partial-observability operators: impulse noise, low-pass filtering, and
grid-line dropout.

All operators are deterministic per seed and keep the grid metadata intact;
observability information travels in the returned masks.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateGridError, InvalidConfigError, UnsupportedGridError
from .grid import Field

BUTTERWORTH_ORDER = 6


def salt_pepper(f: Field, p: float, seed: int) -> Field:
    """Replace each point with the per-channel extreme values with probability p.

    Corrupted points become the channel maximum (salt) or minimum (pepper)
    with equal probability; fields are unbounded, so the extremes stand in
    for white and black pixel values.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidConfigError(f"corruption probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    vals = f.values.astype(np.float64).copy()
    for c in range(vals.shape[0]):
        chan = vals[c]
        hit = rng.random(chan.shape) < p
        salt = rng.random(chan.shape) < 0.5
        chan[hit & salt] = chan.max()
        chan[hit & ~salt] = chan.min()
    return Field(grid=f.grid, channels=f.channels, values=vals)


def _butterworth_gain(shape: tuple[int, ...], cutoff_ratio: float, order: int) -> np.ndarray:
    axes_modes = []
    for n in shape:
        axes_modes.append(np.abs(np.fft.fftfreq(n, d=1.0 / n)))
    if len(shape) == 1:
        radius = axes_modes[0]
    else:
        radius = np.sqrt(axes_modes[0][:, None] ** 2 + axes_modes[1][None, :] ** 2)
    k_max = min(n // 2 for n in shape)
    k_c = cutoff_ratio * k_max
    return 1.0 / np.sqrt(1.0 + (radius / k_c) ** (2 * order))


def butterworth(f: Field, cutoff_ratio: float, order: int = BUTTERWORTH_ORDER) -> Field:
    """Radial low-pass with half-power gain at the cutoff mode.

    cutoff_ratio maps the cutoff to cutoff_ratio * k_max of the mode lattice;
    removing the top fraction p of modes corresponds to cutoff_ratio = 1 - p.
    """
    if not all(f.grid.periodic):
        raise UnsupportedGridError("spectral filtering requires a periodic grid")
    if not 0.0 < cutoff_ratio <= 1.0:
        raise InvalidConfigError(f"cutoff_ratio must be in (0, 1], got {cutoff_ratio}")
    gain = _butterworth_gain(f.grid.shape, cutoff_ratio, order)
    vals = np.empty_like(f.values, dtype=np.float64)
    for c in range(vals.shape[0]):
        spec = np.fft.fftn(f.values[c].astype(np.float64))
        vals[c] = np.fft.ifftn(spec * gain).real
    return Field(grid=f.grid, channels=f.channels, values=vals)


def _fill_dropped(vals: np.ndarray, keep: np.ndarray, axis: int, strategy: str) -> np.ndarray:
    """Fill dropped lines along one axis from the kept ones."""
    n = vals.shape[axis]
    kept_idx = np.nonzero(keep)[0]
    if kept_idx.size == 0:
        raise DegenerateGridError(f"all lines dropped along axis {axis}")
    out = np.moveaxis(vals.copy(), axis, 0)
    if strategy == "nan":
        out[~keep] = np.nan
        return np.moveaxis(out, 0, axis)
    if kept_idx.size == 1:
        out[~keep] = out[kept_idx[0]]
        return np.moveaxis(out, 0, axis)
    dropped = np.nonzero(~keep)[0]
    for i in dropped:
        right = np.searchsorted(kept_idx, i)
        # pick a bracketing pair, extrapolating linearly at the edges
        if right == 0:
            j0, j1 = kept_idx[0], kept_idx[1]
        elif right == kept_idx.size:
            j0, j1 = kept_idx[-2], kept_idx[-1]
        else:
            j0, j1 = kept_idx[right - 1], kept_idx[right]
        t = (i - j0) / (j1 - j0)
        out[i] = (1.0 - t) * out[j0] + t * out[j1]
    return np.moveaxis(out, 0, axis)


def drop_grid_lines(
    f: Field, p: float, seed: int, fill: str = "linear"
) -> tuple[Field, np.ndarray]:
    """Drop each grid line independently with probability p and fill the gaps.

    fill "linear" interpolates (extrapolating at the edges) from the nearest
    kept lines; "nan" leaves gaps unfilled for mask-aware consumers. Returns
    the filled field and a boolean mask that is True at observed points.
    """
    if not 0.0 <= p < 1.0:
        raise InvalidConfigError(f"drop probability must be in [0, 1), got {p}")
    if fill not in ("linear", "nan"):
        raise InvalidConfigError(f"unknown fill strategy {fill!r}")
    rng = np.random.default_rng(seed)
    keeps = [rng.random(n) >= p for n in f.grid.shape]
    for axis, keep in enumerate(keeps):
        if not keep.any():
            raise DegenerateGridError(f"all lines dropped along axis {axis}")

    vals = f.values.astype(np.float64)
    for axis, keep in enumerate(keeps):
        vals = _fill_dropped(vals, keep, axis + 1, fill)  # +1 skips the channel axis

    mask = keeps[0]
    if f.grid.ndims == 2:
        mask = keeps[0][:, None] & keeps[1][None, :]
    if fill == "nan":
        out = Field.__new__(Field)  # bypass finite-value check for the nan variant
        object.__setattr__(out, "grid", f.grid)
        object.__setattr__(out, "channels", f.channels)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(out, "values", vals)
        return out, mask
    return Field(grid=f.grid, channels=f.channels, values=vals), mask
