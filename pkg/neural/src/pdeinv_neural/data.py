"""Reader for pdeinv dataset directories.

Parses ``manifest.json`` plus the raw little-endian f32 binaries and their
JSON sidecars directly; nothing here imports the generator package. Windows
of consecutive frames become training samples, optionally with the
finite-difference derivative channels concatenated as extra inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import Dataset

from .residual import derivative_channels

EVAL_WINDOW_STRIDE = 10


@dataclass(frozen=True)
class TrajectoryFile:
    values: np.ndarray  # [t, c, x(, y)] float32
    times: np.ndarray
    channels: tuple[str, ...]
    spacing: tuple[float, ...]
    periodic: tuple[bool, ...]


def read_trajectory(bin_path: Path) -> TrajectoryFile:
    sidecar = json.loads(bin_path.with_suffix(".json").read_text())
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f4")
    values = raw.reshape(tuple(sidecar["shape"]))
    grid = sidecar["grid"]
    spacing = []
    for n, (lo, hi), per in zip(grid["shape"], grid["domain"], grid["periodic"]):
        if per or grid.get("cell_centered", False):
            spacing.append((hi - lo) / n)
        else:
            spacing.append((hi - lo) / (n - 1))
    return TrajectoryFile(
        values=values,
        times=np.asarray(sidecar["times"], dtype=np.float64),
        channels=tuple(sidecar["channels"]),
        spacing=tuple(spacing),
        periodic=tuple(grid["periodic"]),
    )


@dataclass
class DatasetIndex:
    root: Path
    system_id: str
    param_names: tuple[str, ...]
    param_values: list[dict]
    labels: list[str] | None
    n_ics: int

    @classmethod
    def load(cls, root: str | Path) -> "DatasetIndex":
        root = Path(root)
        manifest = json.loads((root / "manifest.json").read_text())
        splits = manifest.get("splits")
        return cls(
            root=root,
            system_id=manifest["system"]["system_id"],
            param_names=tuple(manifest["system"]["param_names"]),
            param_values=manifest["param_values"],
            labels=list(splits["labels"]) if splits else None,
            n_ics=len(manifest["ic_seeds"][0]) if manifest["ic_seeds"] else 0,
        )

    def params_in_split(self, split: str | None) -> list[int]:
        if split is None:
            return list(range(len(self.param_values)))
        if self.labels is None:
            raise ValueError("dataset has no splits")
        return [i for i, lab in enumerate(self.labels) if lab == split]

    def trajectory(self, param_idx: int, ic_idx: int) -> TrajectoryFile:
        return read_trajectory(self.root / "traj" / f"p{param_idx}_ic{ic_idx}.bin")


@dataclass(frozen=True)
class WindowRef:
    param_idx: int
    ic_idx: int
    start: int


class WindowDataset(Dataset):
    """Windows of k consecutive frames with the target scalar parameter.

    Inputs are the stacked frames, optionally followed by the derivative
    conditioning channels of the earlier frame(s), all in float32.
    """

    def __init__(
        self,
        index: DatasetIndex,
        split: str | None,
        target: str,
        window_frames: int = 2,
        window_stride: int = 5,
        with_derivatives: bool = True,
        ic_indices: list[int] | None = None,
    ):
        self.index = index
        self.target = target
        self.window_frames = window_frames
        self.with_derivatives = with_derivatives
        self.refs: list[WindowRef] = []
        self._cache: dict[tuple[int, int], TrajectoryFile] = {}
        ics = ic_indices if ic_indices is not None else range(index.n_ics)
        for p in index.params_in_split(split):
            traj = index.trajectory(p, 0)
            last = traj.values.shape[0] - window_frames
            for i in ics:
                for start in range(0, last + 1, window_stride):
                    self.refs.append(WindowRef(p, i, start))

    def _traj(self, p: int, i: int) -> TrajectoryFile:
        key = (p, i)
        if key not in self._cache:
            self._cache[key] = self.index.trajectory(p, i)
        return self._cache[key]

    def __len__(self) -> int:
        return len(self.refs)

    def window_tensor(self, ref: WindowRef) -> torch.Tensor:
        traj = self._traj(ref.param_idx, ref.ic_idx)
        sl = slice(ref.start, ref.start + self.window_frames)
        frames = torch.from_numpy(np.array(traj.values[sl]))  # writable copy
        dts = np.diff(traj.times[sl]).astype(np.float32)
        flat = frames.reshape(-1, *frames.shape[2:])  # [t*c, x(,y)]
        if not self.with_derivatives:
            return flat, frames, torch.from_numpy(dts)
        derivs = derivative_channels(
            self.index.system_id, frames, torch.from_numpy(dts),
            traj.spacing, traj.periodic,
        )
        return torch.cat([flat, derivs], dim=0), frames, torch.from_numpy(dts)

    def __getitem__(self, i: int):
        ref = self.refs[i]
        inputs, frames, dts = self.window_tensor(ref)
        truth = float(self.index.param_values[ref.param_idx][self.target])
        return {
            "inputs": inputs,
            "frames": frames,
            "dts": dts,
            "target": torch.tensor(truth, dtype=torch.float32),
            "param_idx": ref.param_idx,
            "ic_idx": ref.ic_idx,
            "window_start": ref.start,
        }


def eval_refs(index: DatasetIndex, split: str | None, window_frames: int = 2,
              stride: int = EVAL_WINDOW_STRIDE) -> list[WindowRef]:
    """The deterministic every-stride-th evaluation windows."""
    refs = []
    for p in index.params_in_split(split):
        traj = index.trajectory(p, 0)
        last = traj.values.shape[0] - window_frames
        for i in range(index.n_ics):
            refs.append([WindowRef(p, i, s) for s in range(0, last + 1, stride)])
    return [r for group in refs for r in group]
