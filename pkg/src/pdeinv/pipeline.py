"""End-to-end dataset generation, split construction, and subsetting.

Generation evolves a fixed set of seeded initial conditions for every
parameter value, writes one trajectory file per (parameter, IC) cell, and
writes the manifest last through an atomic rename. Individual solver
failures are recorded in the manifest instead of aborting the dataset.

Splits label parameter values by their position in the range: the smallest
and largest fraction of the range (per axis, in log space for log-spaced
ranges) form the extreme band, an excised middle band forms the non-extreme
band, and the remaining trainable values are split into train/val/test by
held-out values. Darcy coefficient fields are labeled by the fraction of
high-valued cells instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTrainSplitError, InvalidConfigError, NumericalError
from .grid import CoefficientField, Field, Grid, ParamVector, Trajectory
from .io import (
    DatasetManifest,
    SplitAssignment,
    write_coefficient,
    write_manifest,
    write_trajectory,
)
from .samplers import (
    GrfConfig,
    KdvIcConfig,
    derive_all_seeds,
    sample_darcy_coeff,
    sample_grf,
    sample_kdv_ic,
)
from .solvers import (
    SolverConfig,
    desk_config,
    solve_darcy,
    solve_kdv,
    solve_ns_forced,
    solve_ns_unforced,
    solve_rd,
)
from .systems import SystemSpec, default_grid, get_system

DEFAULT_GRF_LENGTH_SCALE = 0.8
RD_GRF_LENGTH_SCALE = 0.4


# ---------------------------------------------------------------------------
# parameter grids


def param_grid(system: SystemSpec, counts: dict[str, int] | None = None) -> list[ParamVector]:
    """Cartesian product of per-axis value grids with exact range endpoints."""
    counts = counts or system.default_param_counts
    axes: list[tuple[str, np.ndarray]] = []
    for name in system.param_names:
        lo, hi = system.param_ranges[name]
        n = counts.get(name, system.default_param_counts.get(name, 2))
        if n < 1:
            raise InvalidConfigError(f"need at least one value for {name!r}")
        if n == 1:
            vals = np.array([lo])
        elif system.range_spacing == "log":
            vals = np.logspace(math.log10(lo), math.log10(hi), n)
        else:
            vals = np.linspace(lo, hi, n)
        vals[0], vals[-1] = lo, hi
        axes.append((name, vals))
    combos: list[ParamVector] = [ParamVector(entries=())]
    for name, vals in axes:
        combos = [pv.with_value(name, float(v)) for pv in combos for v in vals]
    return combos


# ---------------------------------------------------------------------------
# initial conditions and per-cell solves


def _grf_multi(grid: Grid, length_scale: float, child_seed: int, channels: tuple[str, ...]) -> Field:
    """Independent GRF per channel, each from a channel-derived seed."""
    periodic = Grid(shape=grid.shape, domain=grid.domain,
                    periodic=(True,) * grid.ndims)
    cfg = GrfConfig(grid=periodic, length_scale=length_scale)
    vals = []
    for c in range(len(channels)):
        seed = int(np.random.SeedSequence([child_seed, c]).generate_state(1)[0])
        vals.append(sample_grf(cfg, seed).values[0])
    return Field(grid=grid, channels=channels, values=np.stack(vals))


def make_initial_condition(system: SystemSpec, config: SolverConfig, child_seed: int,
                           ic_options: dict | None = None) -> Field | CoefficientField:
    opts = ic_options or {}
    sid = system.system_id
    if sid == "rd2d":
        grid = Grid(shape=tuple(config.internal_resolution),
                    domain=((-1.0, 1.0), (-1.0, 1.0)),
                    periodic=(False, False), cell_centered=True)
        return _grf_multi(grid, opts.get("length_scale", RD_GRF_LENGTH_SCALE),
                          child_seed, ("u", "v"))
    if sid in ("ns2d_unforced", "ns2d_forced"):
        base = default_grid(sid)
        grid = Grid.periodic_square(config.internal_resolution[0],
                                    base.domain[0][0], base.domain[0][1])
        cfg = GrfConfig(grid=grid,
                        length_scale=opts.get("length_scale", DEFAULT_GRF_LENGTH_SCALE))
        f = sample_grf(cfg, child_seed)
        return Field(grid=grid, channels=("w",), values=f.values)
    if sid == "kdv1d":
        base = default_grid(sid)
        grid = Grid.periodic_line(config.internal_resolution[0], base.lengths[0])
        cfg = KdvIcConfig(grid=grid, n_modes=opts.get("n_modes", 10))
        return sample_kdv_ic(cfg, child_seed)
    if sid == "darcy2d":
        grid = Grid(shape=tuple(config.internal_resolution),
                    domain=((0.0, 1.0), (0.0, 1.0)), periodic=(False, False))
        return sample_darcy_coeff(grid, child_seed)
    raise InvalidConfigError(f"unknown system {sid!r}")


def solve_cell(system: SystemSpec, ic, params: ParamVector,
               config: SolverConfig) -> Trajectory:
    sid = system.system_id
    if sid == "rd2d":
        return solve_rd(ic, params, config)
    if sid == "ns2d_unforced":
        return solve_ns_unforced(ic, params.get("nu"), config)
    if sid == "ns2d_forced":
        return solve_ns_forced(ic, params.get("nu"), config)
    if sid == "kdv1d":
        return solve_kdv(ic, params.get("delta"), config)
    if sid == "darcy2d":
        u = solve_darcy(ic, config)
        return Trajectory(grid=u.grid, channels=u.channels,
                          times=np.array([0.0]), values=u.values[None])
    raise InvalidConfigError(f"unknown system {sid!r}")


@dataclass(frozen=True)
class GenerationSpec:
    system_id: str
    param_values: list[ParamVector]
    n_ics: int
    master_seed: int
    solver_config: SolverConfig | None = None  # None: desk-scale preset
    ic_options: dict = field(default_factory=dict)
    jobs: int = 1


def _generate_cell(args) -> dict:
    """Worker for one (param, ic) cell; returns failure/stat info."""
    spec, out_dir, p_idx, i_idx, child_seed = args
    system = get_system(spec.system_id)
    config = spec.solver_config or desk_config(spec.system_id)
    out_dir = Path(out_dir)
    result = {"param_idx": p_idx, "ic_idx": i_idx}
    try:
        ic = make_initial_condition(system, config, child_seed, spec.ic_options)
        traj = solve_cell(system, ic, spec.param_values[p_idx], config)
        write_trajectory(out_dir / "traj" / f"p{p_idx}_ic{i_idx}.bin", traj)
        if system.system_id == "darcy2d":
            write_coefficient(out_dir / "traj" / f"p{p_idx}_ic{i_idx}.coeff.bin", ic)
            result["darcy_stat"] = darcy_split_stat(ic)
    except NumericalError as exc:
        result["failure"] = f"{type(exc).__name__}: {exc}"
    return result


def generate_dataset(spec: GenerationSpec, out_dir: str | Path) -> DatasetManifest:
    """Generate every (parameter, IC) cell and write the manifest last."""
    system = get_system(spec.system_id)
    config = spec.solver_config or desk_config(spec.system_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = derive_all_seeds(spec.master_seed, len(spec.param_values), spec.n_ics)

    tasks = [
        (spec, str(out_dir), p, i, seeds[p][i])
        for p in range(len(spec.param_values))
        for i in range(spec.n_ics)
    ]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_generate_cell, tasks))
    else:
        results = [_generate_cell(t) for t in tasks]

    failures = [r for r in results if "failure" in r]
    darcy_stats = None
    if system.system_id == "darcy2d":
        darcy_stats = [r.get("darcy_stat", float("nan")) for r in results]

    manifest = DatasetManifest(
        system=system,
        param_values=list(spec.param_values),
        ic_seeds=seeds,
        solver_config=config.to_dict(),
        master_seed=spec.master_seed,
        failures=[
            {"param_idx": r["param_idx"], "ic_idx": r["ic_idx"], "error": r["failure"]}
            for r in failures
        ],
        darcy_stats=darcy_stats,
    )
    write_manifest(manifest, out_dir)
    return manifest


# ---------------------------------------------------------------------------
# splits


@dataclass(frozen=True)
class SplitConfig:
    """Band fractions of the parameter range (log space for log-spaced ranges)."""

    extreme_frac: float = 0.10
    middle_band: tuple[float, float] = (0.40, 0.60)
    val_frac: float = 0.10
    test_frac: float = 0.10
    darcy_nsigma: float = 1.5

    def __post_init__(self):
        if not 0.0 <= self.extreme_frac < 0.5:
            raise InvalidConfigError("extreme_frac must be in [0, 0.5)")
        lo, hi = self.middle_band
        if lo > hi:
            raise InvalidConfigError("middle band must be ordered")
        if lo < hi and not (self.extreme_frac < lo and hi < 1.0 - self.extreme_frac):
            raise InvalidConfigError("middle band must sit strictly inside the extremes")

    def to_dict(self) -> dict:
        return {
            "extreme_frac": self.extreme_frac,
            "middle_band": list(self.middle_band),
            "val_frac": self.val_frac,
            "test_frac": self.test_frac,
            "darcy_nsigma": self.darcy_nsigma,
        }


def _range_fraction(value: float, lo: float, hi: float, spacing: str) -> float:
    if spacing == "log":
        return (math.log(value) - math.log(lo)) / (math.log(hi) - math.log(lo))
    return (value - lo) / (hi - lo)


_EDGE_TOL = 1e-9


def band_edges(system: SystemSpec, name: str, config: SplitConfig) -> dict[str, tuple]:
    """Parameter-space band boundaries implied by the fraction config."""
    lo, hi = system.param_ranges[name]

    def unmap(f: float) -> float:
        if system.range_spacing == "log":
            return math.exp(math.log(lo) + f * (math.log(hi) - math.log(lo)))
        return lo + f * (hi - lo)

    return {
        "extreme": ((lo, unmap(config.extreme_frac)), (unmap(1 - config.extreme_frac), hi)),
        "nonextreme": (unmap(config.middle_band[0]), unmap(config.middle_band[1])),
    }


def build_splits(
    param_values: list[ParamVector], system: SystemSpec, config: SplitConfig | None = None
) -> SplitAssignment:
    """Label every parameter value; see the module docstring for the geometry."""
    config = config or SplitConfig()
    if not param_values:
        raise InvalidConfigError("parameter list is empty")
    labels = [""] * len(param_values)
    trainable: list[int] = []
    for idx, pv in enumerate(param_values):
        fracs = [
            _range_fraction(pv.get(n), *system.param_ranges[n], system.range_spacing)
            for n in pv.names
        ]
        if config.extreme_frac > 0 and any(
            f <= config.extreme_frac + _EDGE_TOL or f >= 1 - config.extreme_frac - _EDGE_TOL
            for f in fracs
        ):
            labels[idx] = "ood_extreme"
        elif config.middle_band[0] < config.middle_band[1] and all(
            config.middle_band[0] - _EDGE_TOL <= f <= config.middle_band[1] + _EDGE_TOL
            for f in fracs
        ):
            labels[idx] = "ood_nonextreme"
        else:
            trainable.append(idx)
    if not trainable:
        raise EmptyTrainSplitError("split bands leave no trainable parameter values")

    # deterministic value-level holdout, spread along the sorted trainable values
    order = sorted(trainable, key=lambda i: param_values[i].values)
    test_stride = round(1.0 / config.test_frac) if config.test_frac > 0 else 0
    val_stride = round(1.0 / config.val_frac) if config.val_frac > 0 else 0
    for rank, idx in enumerate(order):
        if test_stride and rank % test_stride == test_stride // 2:
            labels[idx] = "test_id"
        elif val_stride and rank % val_stride == max(1, val_stride // 4):
            labels[idx] = "val"
        else:
            labels[idx] = "train"
    if "train" not in labels:
        raise EmptyTrainSplitError("holdout fractions leave no training values")
    return SplitAssignment(labels=tuple(labels), split_config=config.to_dict())


def darcy_split_stat(a: CoefficientField, high_level: float = 12.0) -> float:
    """Fraction of grid points at the high coefficient level."""
    return float(np.mean(a.values == high_level))


def build_darcy_splits(stats: list[float], config: SplitConfig | None = None) -> SplitAssignment:
    """Label coefficient samples by the tails of the high-fraction statistic."""
    config = config or SplitConfig()
    arr = np.asarray(stats, dtype=np.float64)
    if arr.size == 0:
        raise InvalidConfigError("no split statistics")
    mu, sigma = float(arr.mean()), float(arr.std())
    labels = [""] * arr.size
    central = []
    for i, s in enumerate(arr):
        if sigma > 0 and abs(s - mu) > config.darcy_nsigma * sigma:
            labels[i] = "ood_extreme"
        else:
            central.append(i)
    if not central:
        raise EmptyTrainSplitError("every sample fell in the extreme tails")
    order = sorted(central, key=lambda i: arr[i])
    test_stride = round(1.0 / config.test_frac) if config.test_frac > 0 else 0
    val_stride = round(1.0 / config.val_frac) if config.val_frac > 0 else 0
    for rank, idx in enumerate(order):
        if test_stride and rank % test_stride == test_stride // 2:
            labels[idx] = "test_id"
        elif val_stride and rank % val_stride == max(1, val_stride // 4):
            labels[idx] = "val"
        else:
            labels[idx] = "train"
    return SplitAssignment(labels=tuple(labels), split_config=config.to_dict())


def assign_splits(manifest: DatasetManifest, config: SplitConfig | None = None) -> SplitAssignment:
    if manifest.system.system_id == "darcy2d":
        if manifest.darcy_stats is None:
            raise InvalidConfigError("darcy manifest lacks split statistics")
        splits = build_darcy_splits(manifest.darcy_stats, config)
    else:
        splits = build_splits(manifest.param_values, manifest.system, config)
    manifest.splits = splits
    return splits


# ---------------------------------------------------------------------------
# data-scaling subsets


@dataclass(frozen=True)
class SubsetSpec:
    """Scaling-harness fractions; counts round up so at least one item remains."""

    ic_fraction: float = 1.0
    param_fraction: float = 1.0
    horizon_fraction: float = 1.0

    def __post_init__(self):
        for name, f in (("ic_fraction", self.ic_fraction),
                        ("param_fraction", self.param_fraction),
                        ("horizon_fraction", self.horizon_fraction)):
            if not 0.0 < f <= 1.0:
                raise InvalidConfigError(f"{name} must be in (0, 1], got {f}")

    def to_dict(self) -> dict:
        return {
            "ic_fraction": self.ic_fraction,
            "param_fraction": self.param_fraction,
            "horizon_fraction": self.horizon_fraction,
        }


EVAL_TAIL_FRACTION = 0.25  # held-out final part of each trajectory


def subset_dataset(manifest: DatasetManifest, spec: SubsetSpec, seed: int) -> DatasetManifest:
    """Deterministic manifest-level view; no field data is copied.

    Training parameters are thinned evenly over the sorted train range with
    the endpoints kept; ICs are drawn uniformly per parameter from a seeded
    stream; the horizon keeps the leading fraction of frames while evaluation
    reserves the trailing quarter.
    """
    if manifest.root is None:
        raise InvalidConfigError("subset needs a manifest bound to a dataset directory")
    if manifest.view is not None:
        raise InvalidConfigError("subset views cannot be nested; subset the base dataset")
    labels = manifest.splits.labels if manifest.splits else ("train",) * manifest.n_params
    train_idx = [i for i, lab in enumerate(labels) if lab == "train"]
    other_idx = [i for i, lab in enumerate(labels) if lab != "train"]

    n_keep = math.ceil(spec.param_fraction * len(train_idx)) if train_idx else 0
    if train_idx and n_keep >= 1:
        order = sorted(train_idx, key=lambda i: manifest.param_values[i].values)
        if n_keep == 1:
            kept_train = [order[0]]
        else:
            pos = np.unique(np.round(np.linspace(0, len(order) - 1, n_keep)).astype(int))
            kept_train = [order[p] for p in pos]
    else:
        kept_train = []
    param_indices = sorted(kept_train + other_idx)

    ic_indices: dict[str, list[int]] = {}
    for p in param_indices:
        n_ics = len(manifest.ic_seeds[p])
        keep = math.ceil(spec.ic_fraction * n_ics)
        rng = np.random.default_rng(np.random.SeedSequence([seed, p]))
        chosen = sorted(rng.choice(n_ics, size=keep, replace=False).tolist())
        ic_indices[str(p)] = chosen

    sample = manifest.load_trajectory(param_indices[0], ic_indices[str(param_indices[0])][0]) \
        if param_indices else None
    n_frames = sample.n_frames if sample is not None else 0
    horizon_frames = math.ceil(spec.horizon_fraction * n_frames)
    eval_start = math.ceil((1.0 - EVAL_TAIL_FRACTION) * n_frames)

    base = manifest.data_root().resolve()
    view = DatasetManifest(
        system=manifest.system,
        param_values=manifest.param_values,
        ic_seeds=manifest.ic_seeds,
        solver_config=manifest.solver_config,
        master_seed=manifest.master_seed,
        splits=manifest.splits,
        failures=manifest.failures,
        darcy_stats=manifest.darcy_stats,
        view={
            "base_dir": str(base),
            "param_indices": param_indices,
            "ic_indices": ic_indices,
            "horizon_frames": int(horizon_frames),
            "eval_frame_range": [int(eval_start), int(n_frames)],
            "subset_spec": spec.to_dict(),
            "seed": int(seed),
        },
        root=manifest.root,
    )
    return view
