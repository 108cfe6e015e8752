"""Solver configuration and per-system presets.

``reference_config`` carries the full-scale generation settings (high internal
resolution, long burn-in, tight tolerances). ``desk_config`` keeps the same
discretizations at sizes that run in seconds on one CPU core; tests and the
bundled mini datasets use it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import InvalidConfigError

# Table-driven recording cadences: horizon split into 64 (NS) or 140 (KdV)
# equal intervals.
NS_UNFORCED_CADENCE = 3.0 / 64.0
NS_FORCED_CADENCE = 14.75 / 64.0
KDV_CADENCE = 102.0 / 140.0


@dataclass(frozen=True)
class SolverConfig:
    internal_resolution: tuple[int, ...]
    output_resolution: tuple[int, ...]
    burn_in_s: float
    record_interval_s: float
    horizon_s: float
    dt: float | None = None  # fixed step; None means adaptive (rtol/atol below)
    rtol: float = 1e-6
    atol: float = 1e-8
    dealias: bool = True

    def __post_init__(self):
        if self.burn_in_s < 0:
            raise InvalidConfigError("burn_in_s must be nonnegative")
        if self.record_interval_s <= 0:
            raise InvalidConfigError("record_interval_s must be positive")
        if self.horizon_s < 0:
            raise InvalidConfigError("horizon_s must be nonnegative")
        if len(self.internal_resolution) != len(self.output_resolution):
            raise InvalidConfigError("internal/output resolution rank mismatch")
        for n_in, n_out in zip(self.internal_resolution, self.output_resolution):
            if n_in % n_out != 0:
                raise InvalidConfigError(
                    f"output resolution {n_out} must divide internal {n_in}"
                )
        if self.dt is not None and self.dt <= 0:
            raise InvalidConfigError("dt must be positive when given")

    @property
    def n_frames(self) -> int:
        """Recorded frames: first frame at the end of burn-in, then every interval."""
        return int(self.horizon_s / self.record_interval_s + 1e-9) + 1

    def record_times(self) -> list[float]:
        return [j * self.record_interval_s for j in range(self.n_frames)]

    def with_overrides(self, **kwargs) -> "SolverConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "internal_resolution": list(self.internal_resolution),
            "output_resolution": list(self.output_resolution),
            "burn_in_s": self.burn_in_s,
            "record_interval_s": self.record_interval_s,
            "horizon_s": self.horizon_s,
            "dt": self.dt,
            "rtol": self.rtol,
            "atol": self.atol,
            "dealias": self.dealias,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(
            internal_resolution=tuple(d["internal_resolution"]),
            output_resolution=tuple(d["output_resolution"]),
            burn_in_s=d["burn_in_s"],
            record_interval_s=d["record_interval_s"],
            horizon_s=d["horizon_s"],
            dt=d.get("dt"),
            rtol=d.get("rtol", 1e-6),
            atol=d.get("atol", 1e-8),
            dealias=d.get("dealias", True),
        )


def reference_config(system_id: str) -> SolverConfig:
    """Full-scale generation settings."""
    if system_id == "rd2d":
        return SolverConfig(
            internal_resolution=(128, 128), output_resolution=(128, 128),
            burn_in_s=1.0, record_interval_s=0.05, horizon_s=5.0,
            dt=None, rtol=1e-6, atol=1e-8,
        )
    if system_id == "ns2d_unforced":
        return SolverConfig(
            internal_resolution=(256, 256), output_resolution=(64, 64),
            burn_in_s=15.0, record_interval_s=NS_UNFORCED_CADENCE, horizon_s=3.0,
            dt=1e-4,
        )
    if system_id == "ns2d_forced":
        return SolverConfig(
            internal_resolution=(256, 256), output_resolution=(64, 64),
            burn_in_s=40.0, record_interval_s=NS_FORCED_CADENCE, horizon_s=14.75,
            dt=5e-4,
        )
    if system_id == "kdv1d":
        return SolverConfig(
            internal_resolution=(256,), output_resolution=(256,),
            burn_in_s=40.0, record_interval_s=KDV_CADENCE, horizon_s=102.0,
            dt=None, rtol=1e-9, atol=1e-9,
        )
    if system_id == "darcy2d":
        return SolverConfig(
            internal_resolution=(241, 241), output_resolution=(241, 241),
            burn_in_s=0.0, record_interval_s=1.0, horizon_s=0.0,
        )
    raise InvalidConfigError(f"unknown system {system_id!r}")


def desk_config(system_id: str) -> SolverConfig:
    """Laptop-scale settings used by the test and acceptance suites."""
    if system_id == "rd2d":
        return SolverConfig(
            internal_resolution=(64, 64), output_resolution=(64, 64),
            burn_in_s=1.0, record_interval_s=0.05, horizon_s=5.0,
            dt=None, rtol=1e-6, atol=1e-8,
        )
    if system_id == "ns2d_unforced":
        return SolverConfig(
            internal_resolution=(128, 128), output_resolution=(64, 64),
            burn_in_s=2.0, record_interval_s=NS_UNFORCED_CADENCE, horizon_s=3.0,
            dt=1e-3,
        )
    if system_id == "ns2d_forced":
        return SolverConfig(
            internal_resolution=(128, 128), output_resolution=(64, 64),
            burn_in_s=5.0, record_interval_s=0.0625, horizon_s=2.0,
            dt=1e-3,
        )
    if system_id == "kdv1d":
        return SolverConfig(
            internal_resolution=(256,), output_resolution=(256,),
            burn_in_s=5.0, record_interval_s=0.25, horizon_s=15.0,
            dt=None, rtol=1e-9, atol=1e-9,
        )
    if system_id == "darcy2d":
        return SolverConfig(
            internal_resolution=(121, 121), output_resolution=(121, 121),
            burn_in_s=0.0, record_interval_s=1.0, horizon_s=0.0,
        )
    raise InvalidConfigError(f"unknown system {system_id!r}")
