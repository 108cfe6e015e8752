"""Operator-facing command line.

Subcommands bind generation, splitting, inversion, degradation, spectra and
evaluation into reproducible runs. Every invocation writes a ``run.json``
with the fully resolved configuration and a version string; reruns with an
identical run.json produce byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O
failure. The PDEINV_SEED environment variable overrides --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .degrade import butterworth, drop_grid_lines, salt_pepper
from .errors import InvalidConfigError, NumericalError, PdeinvError
from .grid import ParamVector
from .inverse import (
    darcy_estimate,
    estimate_darcy_pixelwise,
    estimate_linear_lsq,
    estimate_scan,
)
from .io import read_manifest, read_trajectory, write_manifest, write_trajectory
from .metrics import aggregate_over_seeds, eval_window_starts, relative_error
from .pipeline import (
    GenerationSpec,
    SplitConfig,
    SubsetSpec,
    assign_splits,
    generate_dataset,
    param_grid,
    subset_dataset,
)
from .solvers import SolverConfig, desk_config
from .spectra import energy_spectrum, self_consistency
from .systems import get_system

CLI_SYSTEM_NAMES = {
    "rd2d": "rd2d",
    "ns2d-unforced": "ns2d_unforced",
    "ns2d-forced": "ns2d_forced",
    "kdv1d": "kdv1d",
    "darcy2d": "darcy2d",
}
SPLIT_NAMES = {
    "train": "train",
    "val": "val",
    "test-id": "test_id",
    "ood-nonextreme": "ood_nonextreme",
    "ood-extreme": "ood_extreme",
    "all": None,
}


def _version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return f"{__version__}+{out.stdout.strip()}"
    except Exception:
        pass
    return __version__


def _write_run_json(args: argparse.Namespace, out_dir: Path | None) -> None:
    record = {
        "command": args.command,
        "version": _version_string(),
        "config": {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items())
            if k not in ("func", "command")
        },
    }
    target = (out_dir or Path.cwd()) / f"run_{args.command}.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")


def _resolve_seed(args) -> int:
    env = os.environ.get("PDEINV_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _emit(rows, out: str | None) -> None:
    text = "\n".join(json.dumps(r, sort_keys=True) for r in rows)
    if out:
        Path(out).write_text(text + ("\n" if text else ""))
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    system = get_system(CLI_SYSTEM_NAMES[args.system])
    seed = _resolve_seed(args)
    if args.params_file:
        raw = json.loads(Path(args.params_file).read_text())
        params = [ParamVector.from_dict(d, order=system.param_names) for d in raw]
    elif system.system_id == "darcy2d":
        n = args.n_params or 8
        params = [ParamVector(entries=()) for _ in range(n)]
    else:
        counts = None
        if args.n_params:
            counts = {name: args.n_params for name in system.param_names}
        params = param_grid(system, counts)

    config = desk_config(system.system_id)
    overrides = {}
    if args.resolution:
        ndims = len(config.internal_resolution)
        overrides["internal_resolution"] = (args.resolution,) * ndims
        overrides["output_resolution"] = (args.output_resolution or args.resolution,) * ndims
    elif args.output_resolution:
        ndims = len(config.internal_resolution)
        overrides["output_resolution"] = (args.output_resolution,) * ndims
    if args.cadence:
        overrides["record_interval_s"] = args.cadence
    if args.horizon is not None:
        overrides["horizon_s"] = args.horizon
    if args.burn_in is not None:
        overrides["burn_in_s"] = args.burn_in
    if args.dt is not None:
        overrides["dt"] = args.dt
    if overrides:
        config = config.with_overrides(**overrides)

    spec = GenerationSpec(
        system_id=system.system_id,
        param_values=params,
        n_ics=args.ics,
        master_seed=seed,
        solver_config=config,
        jobs=args.jobs,
    )
    out_dir = Path(args.out)
    manifest = generate_dataset(spec, out_dir)
    _write_run_json(args, out_dir)
    print(f"generated {len(manifest.cells())} cells "
          f"({len(manifest.failures)} failures) in {out_dir}")
    return 0


def cmd_split(args) -> int:
    manifest = read_manifest(args.dataset)
    cfg_kwargs = {}
    if args.extreme_frac is not None:
        cfg_kwargs["extreme_frac"] = args.extreme_frac
    if args.band:
        lo, hi = args.band.split(":")
        cfg_kwargs["middle_band"] = (float(lo), float(hi))
    splits = assign_splits(manifest, SplitConfig(**cfg_kwargs))
    counts = {lab: splits.labels.count(lab) for lab in sorted(set(splits.labels))}
    if args.write:
        write_manifest(manifest, manifest.root)
    _write_run_json(args, manifest.root)
    print(json.dumps(counts, sort_keys=True))
    return 0


def _split_cells(manifest, split_label):
    for p, i in manifest.cells():
        if manifest.is_failed(p, i):
            continue
        if split_label is not None:
            if manifest.splits is None:
                raise InvalidConfigError("dataset has no splits; run `split --write` first")
            if manifest.splits.label_for(p) != split_label:
                continue
        yield p, i


def cmd_invert(args) -> int:
    manifest = read_manifest(args.dataset)
    system = manifest.system
    split_label = SPLIT_NAMES[args.split]
    rows = []
    errors = []
    for p, i in _split_cells(manifest, split_label):
        if system.system_id == "darcy2d":
            traj = manifest.load_trajectory(p, i)
            est = darcy_estimate(traj.frame(0), system)
            coeff, _ = estimate_darcy_pixelwise(traj.frame(0), system)
            truth = manifest.load_coefficient(p, i)
            err = relative_error(coeff, truth)
            rows.append({
                "param_idx": p, "ic_idx": i, "window_start": 0,
                "phi_hat": {}, "residual_at_hat": est.residual_at_hat,
                "relative_error": err,
            })
            errors.append(err)
            continue
        truth = manifest.param_values[p]
        target = args.target or system.param_names[0]
        known = ParamVector(
            entries=tuple((n, truth.get(n)) for n in system.param_names if n != target)
        )
        traj = manifest.load_trajectory(p, i)
        starts = eval_window_starts(traj.n_frames, args.window_frames, args.window_stride)
        for start in starts:
            window = traj.window(start, args.window_frames)
            if args.method == "lsq":
                est = estimate_linear_lsq(window, system, known)
            else:
                lo, hi = system.param_ranges[target]
                if args.scan_grid:
                    grid_vals = [float(x) for x in args.scan_grid.split(",")]
                elif system.range_spacing == "log":
                    grid_vals = np.logspace(np.log10(lo), np.log10(hi), args.scan_points)
                else:
                    grid_vals = np.linspace(lo, hi, args.scan_points)
                est = estimate_scan(window, system, known, grid_vals,
                                    refine=not args.no_refine)
            err = relative_error(est.phi_hat.get(target), truth.get(target))
            row = {
                "param_idx": p, "ic_idx": i, "window_start": start,
                "phi_hat": {target: est.phi_hat.get(target)},
                "residual_at_hat": est.residual_at_hat,
                "relative_error": err,
            }
            if args.derivative_channels:
                row["derivative_channels"] = list(system.derivative_channels)
            rows.append(row)
            errors.append(err)
    _emit(rows, args.out)
    _write_run_json(args, Path(args.out).parent if args.out else Path(args.dataset))
    if errors:
        print(f"mean relative error: {np.mean(errors):.6g} over {len(errors)} windows",
              file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    manifest = read_manifest(args.dataset)
    system = manifest.system
    split_label = SPLIT_NAMES[args.split]
    wanted = set(_split_cells(manifest, split_label))
    errors = []
    with open(args.pred) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            key = (row["param_idx"], row["ic_idx"])
            if key not in wanted:
                continue
            if system.system_id == "darcy2d":
                pred_file = row.get("phi_hat_file")
                if pred_file is None:
                    raise InvalidConfigError("darcy predictions need phi_hat_file entries")
                pred = np.fromfile(Path(args.pred).parent / pred_file, dtype="<f4")
                truth = manifest.load_coefficient(*key)
                errors.append(
                    relative_error(pred.reshape(truth.values.shape), truth.values)
                )
            else:
                truth = manifest.param_values[key[0]]
                for name, value in row["phi_hat"].items():
                    errors.append(relative_error(value, truth.get(name)))
    if not errors:
        raise InvalidConfigError("no predictions matched the requested split")
    report = aggregate_over_seeds(errors, metric_name="relative_error")
    out_row = {
        "system": system.system_id,
        "split": args.split,
        **report.to_dict(),
        "n_windows": len(errors),
    }
    print(json.dumps(out_row, sort_keys=True))
    _write_run_json(args, Path(args.pred).resolve().parent)
    return 0


def cmd_spectra(args) -> int:
    traj = read_trajectory(args.traj)
    rows = []
    if args.self_consistency:
        dataset_dir = Path(args.traj).resolve().parent.parent
        manifest = read_manifest(dataset_dir)
        system = manifest.system
        config = SolverConfig.from_dict(manifest.solver_config).with_overrides(burn_in_s=0.0)
        phi_hat = ParamVector(entries=(("nu", args.phi_hat),))
        report = self_consistency(system, traj, phi_hat, config)
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        spec = energy_spectrum(traj.frame(args.frame))
        for k, e in zip(spec.wavenumbers, spec.energy):
            rows.append(f"{int(k)},{e:.12e}")
        text = "k,E\n" + "\n".join(rows)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
    _write_run_json(args, Path(args.traj).resolve().parent.parent)
    return 0


def cmd_degrade(args) -> int:
    manifest = read_manifest(args.dataset)
    seed = _resolve_seed(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for p, i in manifest.cells():
        if manifest.is_failed(p, i):
            continue
        traj = manifest.load_trajectory(p, i)
        frames = []
        masks = []
        for t in range(traj.n_frames):
            frame = traj.frame(t)
            frame_seed = int(np.random.SeedSequence([seed, p, i, t]).generate_state(1)[0])
            if args.op == "snp":
                out = salt_pepper(frame, args.p, frame_seed)
                mask = np.ones(frame.grid.shape, dtype=bool)
            elif args.op == "butterworth":
                out = butterworth(frame, 1.0 - args.p)
                mask = np.ones(frame.grid.shape, dtype=bool)
            else:
                out, mask = drop_grid_lines(frame, args.p, frame_seed)
            frames.append(out.values)
            masks.append(mask)
        corrupted = traj.__class__(
            grid=traj.grid, channels=traj.channels, times=traj.times,
            values=np.stack(frames),
        )
        write_trajectory(out_dir / manifest.traj_relpath(p, i), corrupted)
        np.save(out_dir / "traj" / f"p{p}_ic{i}.mask.npy", np.stack(masks))
        if manifest.system.system_id == "darcy2d":
            for suffix in (".coeff.bin", ".coeff.json"):
                src = manifest.data_root() / "traj" / f"p{p}_ic{i}{suffix}"
                (out_dir / "traj" / src.name).write_bytes(src.read_bytes())
    manifest.root = None
    write_manifest(manifest, out_dir)
    _write_run_json(args, out_dir)
    print(f"degraded dataset written to {out_dir}")
    return 0


def cmd_subset(args) -> int:
    manifest = read_manifest(args.dataset)
    spec = SubsetSpec(
        ic_fraction=args.ic_frac,
        param_fraction=args.param_frac,
        horizon_fraction=args.horizon_frac,
    )
    view = subset_dataset(manifest, spec, _resolve_seed(args))
    out_dir = Path(args.out)
    write_manifest(view, out_dir)
    _write_run_json(args, out_dir)
    print(f"subset view written to {out_dir} "
          f"({len(view.cells())} cells, horizon {view.view['horizon_frames']} frames)")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdeinv",
        description="PDE inverse-problem benchmark: generate, split, invert, evaluate.",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a dataset")
    g.add_argument("--system", required=True, choices=sorted(CLI_SYSTEM_NAMES))
    pgroup = g.add_mutually_exclusive_group()
    pgroup.add_argument("--params-file", help="JSON list of parameter dicts")
    pgroup.add_argument("--defaults", action="store_true",
                        help="full default parameter grid for the system")
    g.add_argument("--n-params", type=int, help="values per parameter axis")
    g.add_argument("--ics", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--resolution", type=int, help="internal resolution per axis")
    g.add_argument("--output-resolution", type=int)
    g.add_argument("--cadence", type=float, help="recording interval in seconds")
    g.add_argument("--horizon", type=float)
    g.add_argument("--burn-in", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--jobs", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("split", help="construct evaluation splits")
    s.add_argument("--dataset", required=True)
    s.add_argument("--extreme-frac", type=float)
    s.add_argument("--band", help="middle band fractions lo:hi")
    s.add_argument("--write", action="store_true")
    s.set_defaults(func=cmd_split)

    inv = sub.add_parser("invert", help="classical inverse estimation")
    inv.add_argument("--dataset", required=True)
    inv.add_argument("--method", default="lsq", choices=["lsq", "scan", "pixelwise"])
    inv.add_argument("--split", default="all", choices=sorted(SPLIT_NAMES))
    inv.add_argument("--window-frames", type=int, default=2)
    inv.add_argument("--window-stride", type=int, default=10)
    inv.add_argument("--derivative-channels", action="store_true",
                     help="list the conditioning channels in each output row")
    inv.add_argument("--target", help="parameter slot to estimate (multi-parameter systems)")
    inv.add_argument("--scan-points", type=int, default=10)
    inv.add_argument("--scan-grid", help="comma-separated candidate values")
    inv.add_argument("--no-refine", action="store_true")
    inv.add_argument("--out", help="write JSON-lines rows here instead of stdout")
    inv.set_defaults(func=cmd_invert)

    ev = sub.add_parser("eval", help="score a predictions file")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--split", default="all", choices=sorted(SPLIT_NAMES))
    ev.set_defaults(func=cmd_eval)

    sp = sub.add_parser("spectra", help="energy spectrum or self-consistency check")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--frame", type=int, default=0)
    sp.add_argument("--self-consistency", action="store_true")
    sp.add_argument("--phi-hat", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectra)

    dg = sub.add_parser("degrade", help="write a corrupted copy of a dataset")
    dg.add_argument("--dataset", required=True)
    dg.add_argument("--op", required=True, choices=["snp", "butterworth", "gridlines"])
    dg.add_argument("--p", type=float, required=True)
    dg.add_argument("--seed", type=int, default=0)
    dg.add_argument("--out", required=True)
    dg.set_defaults(func=cmd_degrade)

    su = sub.add_parser("subset", help="manifest-level data-scaling view")
    su.add_argument("--dataset", required=True)
    su.add_argument("--ic-frac", type=float, default=1.0)
    su.add_argument("--param-frac", type=float, default=1.0)
    su.add_argument("--horizon-frac", type=float, default=1.0)
    su.add_argument("--seed", type=int, default=0)
    su.add_argument("--out", required=True)
    su.set_defaults(func=cmd_subset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4
    except PdeinvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
