"""Grids, fields, trajectories and parameter vectors.

All spatial data in the package lives on a :class:`Grid`: a uniform, axis-aligned
discretization of a 1D interval or 2D box. Periodic axes are sampled at N points
with spacing (hi-lo)/N (the endpoint is the wrap-around image of the origin);
non-periodic axes include both endpoints with spacing (hi-lo)/(N-1), except for
cell-centered grids where points sit at cell midpoints with spacing (hi-lo)/N.

Values are immutable after construction: arrays are copied defensively only at
construction and flagged read-only, so instances are safe to share across
parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidConfigError

PARAM_NAMES = ("nu", "delta", "k", "Du", "Dv")


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform discretization descriptor shared by all fields.

    shape: per-axis point counts.
    domain: per-axis (lo, hi) in nondimensional length units.
    periodic: per-axis wrap flags.
    cell_centered: points at cell midpoints instead of vertices (finite-volume
        grids); only meaningful on non-periodic axes.
    """

    shape: tuple[int, ...]
    domain: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]
    cell_centered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(
            self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain)
        )
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        if not (len(self.shape) == len(self.domain) == len(self.periodic)):
            raise InvalidConfigError("shape, domain and periodic must have equal length")
        if self.ndims not in (1, 2):
            raise InvalidConfigError(f"only 1D and 2D grids supported, got {self.ndims}D")
        for n in self.shape:
            if n < 4:
                raise InvalidConfigError(f"grid axes need at least 4 points, got {n}")
        for lo, hi in self.domain:
            if not hi > lo:
                raise InvalidConfigError(f"domain upper bound must exceed lower, got ({lo}, {hi})")

    @property
    def ndims(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        out = []
        for n, (lo, hi), per in zip(self.shape, self.domain, self.periodic):
            if per or self.cell_centered:
                out.append((hi - lo) / n)
            else:
                out.append((hi - lo) / (n - 1))
        return tuple(out)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.domain)

    def axis_coords(self, axis: int) -> np.ndarray:
        """Coordinates of the grid points along one axis."""
        n = self.shape[axis]
        lo, hi = self.domain[axis]
        if self.periodic[axis]:
            return lo + (hi - lo) * np.arange(n) / n
        if self.cell_centered:
            return lo + (hi - lo) * (np.arange(n) + 0.5) / n
        return np.linspace(lo, hi, n)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Meshgrid ('ij' indexing) of point coordinates, one array per axis."""
        axes = [self.axis_coords(i) for i in range(self.ndims)]
        if self.ndims == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "domain": [list(d) for d in self.domain],
            "periodic": list(self.periodic),
            "cell_centered": self.cell_centered,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(
            shape=tuple(d["shape"]),
            domain=tuple(tuple(x) for x in d["domain"]),
            periodic=tuple(d["periodic"]),
            cell_centered=bool(d.get("cell_centered", False)),
        )

    @classmethod
    def periodic_square(cls, n: int, lo: float = 0.0, hi: float = 1.0) -> "Grid":
        return cls(shape=(n, n), domain=((lo, hi), (lo, hi)), periodic=(True, True))

    @classmethod
    def periodic_line(cls, n: int, length: float) -> "Grid":
        return cls(shape=(n,), domain=((0.0, length),), periodic=(True,))


@dataclass(frozen=True)
class Field:
    """Multi-channel snapshot on a grid; values indexed [channel, x(, y)]."""

    grid: Grid
    channels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        vals = _as_readonly(self.values)
        expected = (len(self.channels),) + self.grid.shape
        if vals.shape != expected:
            raise InvalidConfigError(f"field values shape {vals.shape} != {expected}")
        if not np.all(np.isfinite(vals)):
            raise InvalidConfigError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def channel(self, name: str) -> np.ndarray:
        return self.values[self.channels.index(name)]


@dataclass(frozen=True)
class CoefficientField:
    """Strictly positive scalar coefficient over a grid (no channel axis)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _as_readonly(self.values)
        if vals.shape != self.grid.shape:
            raise InvalidConfigError(f"coefficient shape {vals.shape} != {self.grid.shape}")
        if not np.all(np.isfinite(vals)) or not np.all(vals > 0):
            raise InvalidConfigError("coefficient values must be finite and strictly positive")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed stack of solution fields; values indexed [time, channel, x(, y)]."""

    grid: Grid
    channels: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        times = _as_readonly(np.asarray(self.times, dtype=np.float64))
        vals = _as_readonly(self.values)
        if times.ndim != 1 or times.size < 1:
            raise InvalidConfigError("times must be a non-empty 1D array")
        if np.any(np.diff(times) <= 0):
            raise InvalidConfigError("times must be strictly increasing")
        expected = (times.size, len(self.channels)) + self.grid.shape
        if vals.shape != expected:
            raise InvalidConfigError(f"trajectory values shape {vals.shape} != {expected}")
        if not np.all(np.isfinite(vals)):
            raise InvalidConfigError("trajectory values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", vals)

    @property
    def n_frames(self) -> int:
        return self.times.size

    def frame(self, idx: int) -> Field:
        return Field(grid=self.grid, channels=self.channels, values=self.values[idx])

    def window(self, start: int, n_frames: int) -> "Trajectory":
        """Contiguous sub-trajectory of n_frames starting at frame index start."""
        if start < 0 or n_frames < 1 or start + n_frames > self.n_frames:
            raise InvalidConfigError(
                f"window [{start}, {start + n_frames}) outside trajectory of {self.n_frames} frames"
            )
        return Trajectory(
            grid=self.grid,
            channels=self.channels,
            times=self.times[start : start + n_frames],
            values=self.values[start : start + n_frames],
        )

    def time_window(self, t0: float, t1: float) -> "Trajectory":
        """Sub-trajectory of the frames with t0 <= t <= t1."""
        mask = (self.times >= t0) & (self.times <= t1)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            raise InvalidConfigError(f"no frames in time window [{t0}, {t1}]")
        return self.window(int(idx[0]), int(idx.size))


@dataclass(frozen=True)
class ParamVector:
    """Ordered (name, value) pairs of physical parameters.

    Names are drawn from the fixed vocabulary {nu, delta, k, Du, Dv}. Values
    outside a system's declared range are allowed when ``out_of_range`` is set
    (manifest validation reports them otherwise).
    """

    entries: tuple[tuple[str, float], ...]
    out_of_range: bool = False

    def __post_init__(self):
        entries = tuple((str(n), float(v)) for n, v in self.entries)
        names = [n for n, _ in entries]
        if len(set(names)) != len(names):
            raise InvalidConfigError(f"duplicate parameter names in {names}")
        for n in names:
            if n not in PARAM_NAMES:
                raise InvalidConfigError(f"unknown parameter name {n!r}")
        for _, v in entries:
            if not np.isfinite(v):
                raise InvalidConfigError("parameter values must be finite")
        object.__setattr__(self, "entries", entries)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.entries)

    def get(self, name: str) -> float:
        for n, v in self.entries:
            if n == name:
                return v
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return name in self.names

    def with_value(self, name: str, value: float) -> "ParamVector":
        """Copy with one slot replaced (or appended if absent)."""
        if self.has(name):
            entries = tuple((n, value if n == name else v) for n, v in self.entries)
        else:
            entries = self.entries + ((name, value),)
        return replace(self, entries=entries)

    def to_dict(self) -> dict:
        return dict(self.entries)

    @classmethod
    def from_dict(cls, d: dict, order: Sequence[str] | None = None) -> "ParamVector":
        names = list(order) if order is not None else list(d.keys())
        return cls(entries=tuple((n, d[n]) for n in names if n in d))


def single_param(name: str, value: float) -> ParamVector:
    return ParamVector(entries=((name, value),))
