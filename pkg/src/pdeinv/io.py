"""On-disk dataset format: raw f32 binaries, JSON sidecars, and the manifest.

A trajectory is stored as one row-major little-endian float32 binary plus a
JSON sidecar describing shape, axes, timestamps, channels and grid geometry.
The dataset root holds ``manifest.json`` with generation provenance (parameter
values, IC seeds, solver config, master seed, splits, failures). All writes of
the manifest go through an atomic rename so readers never see partial state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError
from .grid import CoefficientField, Grid, ParamVector, Trajectory
from .systems import SystemSpec, get_system

FORMAT_VERSION = "1"
SPLIT_LABELS = ("train", "val", "test_id", "ood_nonextreme", "ood_extreme")


def _json_dump(obj, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def write_trajectory(bin_path: str | Path, traj: Trajectory) -> None:
    """Write values as f32le row-major plus a .json sidecar next to the binary."""
    bin_path = Path(bin_path)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(traj.values, dtype="<f4")
    bin_path.write_bytes(data.tobytes())
    axes = ["t", "c"] + (["x"] if traj.grid.ndims == 1 else ["x", "y"])
    sidecar = {
        "shape": list(data.shape),
        "dtype": "f32le",
        "axes": axes,
        "times": [float(t) for t in traj.times],
        "channels": list(traj.channels),
        "grid": traj.grid.to_dict(),
    }
    _json_dump(sidecar, bin_path.with_suffix(".json"))


def read_trajectory(bin_path: str | Path) -> Trajectory:
    bin_path = Path(bin_path)
    sidecar = json.loads(bin_path.with_suffix(".json").read_text())
    shape = tuple(sidecar["shape"])
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f4")
    if raw.size != int(np.prod(shape)):
        raise InvalidConfigError(
            f"{bin_path}: binary holds {raw.size} floats, sidecar says {shape}"
        )
    return Trajectory(
        grid=Grid.from_dict(sidecar["grid"]),
        channels=tuple(sidecar["channels"]),
        times=np.asarray(sidecar["times"], dtype=np.float64),
        values=raw.reshape(shape),
    )


def write_coefficient(bin_path: str | Path, coeff: CoefficientField) -> None:
    bin_path = Path(bin_path)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(coeff.values, dtype="<f4")
    bin_path.write_bytes(data.tobytes())
    sidecar = {
        "shape": list(data.shape),
        "dtype": "f32le",
        "axes": ["x", "y"][: coeff.grid.ndims],
        "grid": coeff.grid.to_dict(),
    }
    _json_dump(sidecar, bin_path.with_suffix(".json"))


def read_coefficient(bin_path: str | Path) -> CoefficientField:
    bin_path = Path(bin_path)
    sidecar = json.loads(bin_path.with_suffix(".json").read_text())
    shape = tuple(sidecar["shape"])
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f4")
    return CoefficientField(grid=Grid.from_dict(sidecar["grid"]), values=raw.reshape(shape))


@dataclass(frozen=True)
class SplitAssignment:
    """Per-parameter split labels plus the band fractions that produced them."""

    labels: tuple[str, ...]  # aligned with manifest.param_values
    split_config: dict

    def __post_init__(self):
        for lab in self.labels:
            if lab not in SPLIT_LABELS:
                raise InvalidConfigError(f"unknown split label {lab!r}")

    def label_for(self, param_idx: int) -> str:
        return self.labels[param_idx]

    def indices(self, label: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == label]

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "split_config": self.split_config}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitAssignment":
        return cls(labels=tuple(d["labels"]), split_config=dict(d["split_config"]))


@dataclass
class DatasetManifest:
    """Generation provenance for one dataset directory."""

    system: SystemSpec
    param_values: list[ParamVector]
    ic_seeds: list[list[int]]
    solver_config: dict
    master_seed: int
    splits: SplitAssignment | None = None
    format_version: str = FORMAT_VERSION
    failures: list[dict] = field(default_factory=list)
    darcy_stats: list[float] | None = None
    view: dict | None = None
    root: Path | None = None  # directory the manifest was read from; not serialized

    @property
    def n_params(self) -> int:
        return len(self.param_values)

    def n_ics(self, param_idx: int = 0) -> int:
        return len(self.ic_seeds[param_idx]) if self.ic_seeds else 0

    def traj_relpath(self, param_idx: int, ic_idx: int) -> str:
        return f"traj/p{param_idx}_ic{ic_idx}.bin"

    def coeff_relpath(self, param_idx: int, ic_idx: int) -> str:
        return f"traj/p{param_idx}_ic{ic_idx}.coeff.bin"

    def data_root(self) -> Path:
        """Directory holding the binary files (the base dataset for views)."""
        if self.root is None:
            raise InvalidConfigError("manifest has no root directory")
        if self.view is not None and "base_dir" in self.view:
            base = Path(self.view["base_dir"])
            return base if base.is_absolute() else (self.root / base)
        return self.root

    def is_failed(self, param_idx: int, ic_idx: int) -> bool:
        return any(
            f["param_idx"] == param_idx and f["ic_idx"] == ic_idx for f in self.failures
        )

    def cells(self) -> list[tuple[int, int]]:
        """All (param_idx, ic_idx) pairs covered by this manifest (or its view)."""
        if self.view is not None:
            params = self.view["param_indices"]
            return [(p, i) for p in params for i in self.view["ic_indices"][str(p)]]
        return [
            (p, i)
            for p in range(self.n_params)
            for i in range(len(self.ic_seeds[p]))
        ]

    def load_trajectory(self, param_idx: int, ic_idx: int) -> Trajectory:
        traj = read_trajectory(self.data_root() / self.traj_relpath(param_idx, ic_idx))
        if self.view is not None and "horizon_frames" in self.view:
            traj = traj.window(0, min(self.view["horizon_frames"], traj.n_frames))
        return traj

    def load_coefficient(self, param_idx: int, ic_idx: int) -> CoefficientField:
        return read_coefficient(self.data_root() / self.coeff_relpath(param_idx, ic_idx))

    def to_dict(self) -> dict:
        d = {
            "format_version": self.format_version,
            "system": self.system.to_dict(),
            "master_seed": self.master_seed,
            "solver_config": self.solver_config,
            "param_values": [p.to_dict() for p in self.param_values],
            "ic_seeds": [list(s) for s in self.ic_seeds],
            "failures": self.failures,
        }
        if self.splits is not None:
            d["splits"] = self.splits.to_dict()
        if self.darcy_stats is not None:
            d["darcy_stats"] = self.darcy_stats
        if self.view is not None:
            d["view"] = self.view
        return d

    @classmethod
    def from_dict(cls, d: dict, root: Path | None = None) -> "DatasetManifest":
        system = get_system(d["system"]["system_id"])
        order = system.param_names
        return cls(
            system=system,
            param_values=[ParamVector.from_dict(p, order=order) for p in d["param_values"]],
            ic_seeds=[list(s) for s in d["ic_seeds"]],
            solver_config=dict(d["solver_config"]),
            master_seed=int(d["master_seed"]),
            splits=SplitAssignment.from_dict(d["splits"]) if "splits" in d else None,
            format_version=d.get("format_version", FORMAT_VERSION),
            failures=list(d.get("failures", [])),
            darcy_stats=d.get("darcy_stats"),
            view=d.get("view"),
            root=root,
        )


def write_manifest(manifest: DatasetManifest, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    _json_dump(manifest.to_dict(), path)
    manifest.root = out_dir
    return path


def read_manifest(dataset_dir: str | Path) -> DatasetManifest:
    dataset_dir = Path(dataset_dir)
    d = json.loads((dataset_dir / "manifest.json").read_text())
    return DatasetManifest.from_dict(d, root=dataset_dir)


def validate_manifest(manifest: DatasetManifest) -> list[str]:
    """Collect human-readable invariant violations; empty list means valid."""
    violations: list[str] = []
    sizes = {len(s) for s in manifest.ic_seeds}
    if len(sizes) > 1:
        bad = [i for i, s in enumerate(manifest.ic_seeds) if len(s) != len(manifest.ic_seeds[0])]
        violations.append(
            f"ic_seeds lengths differ across parameters (first inconsistent index {bad[0]})"
        )
    if len(manifest.ic_seeds) != manifest.n_params:
        violations.append(
            f"ic_seeds has {len(manifest.ic_seeds)} entries for {manifest.n_params} parameters"
        )
    ranges = manifest.system.param_ranges
    for i, pv in enumerate(manifest.param_values):
        for name, value in pv.entries:
            lo, hi = ranges.get(name, (-np.inf, np.inf))
            if not (lo <= value <= hi) and not pv.out_of_range:
                violations.append(
                    f"param {i} ({name}={value}) out of declared range [{lo}, {hi}]"
                )
    if manifest.splits is not None:
        if len(manifest.splits.labels) != manifest.n_params:
            violations.append(
                f"splits label {len(manifest.splits.labels)} parameters, manifest has {manifest.n_params}"
            )
    if manifest.root is not None:
        for p, i in manifest.cells():
            if manifest.is_failed(p, i):
                continue
            path = manifest.data_root() / manifest.traj_relpath(p, i)
            if not path.exists():
                violations.append(f"missing trajectory file {path}")
            if manifest.system.system_id == "darcy2d":
                cpath = manifest.data_root() / manifest.coeff_relpath(p, i)
                if not cpath.exists():
                    violations.append(f"missing coefficient file {cpath}")
    return violations
