"""Shared fixtures: a cached KdV mini dataset generated through the benchmark
CLI, and trained model variants reused across the test modules.

The dataset lives under tests/_cache and is rebuilt only when missing, so the
first run pays the generation cost once.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
import torch

CACHE = Path(__file__).parent / "_cache"
DATASET = CACHE / "kdv_mini"
DELTAS = [0.9, 1.5, 2.0, 2.7, 3.6, 4.3, 4.8]
N_ICS = 20
MASTER_SEED = 42


def _run_benchmark_cli(*argv):
    out = subprocess.run(
        [sys.executable, "-m", "pdeinv.cli", *[str(a) for a in argv]],
        capture_output=True, text=True,
    )
    if out.returncode != 0:
        raise RuntimeError(f"benchmark CLI failed ({out.returncode}): {out.stderr}")
    return out


@pytest.fixture(scope="session")
def kdv_dataset() -> Path:
    manifest = DATASET / "manifest.json"
    if manifest.exists():
        parsed = json.loads(manifest.read_text())
        if "splits" in parsed and len(parsed["param_values"]) == len(DELTAS):
            return DATASET
        shutil.rmtree(DATASET)
    CACHE.mkdir(exist_ok=True)
    params_file = CACHE / "kdv_params.json"
    params_file.write_text(json.dumps([{"delta": d} for d in DELTAS]))
    _run_benchmark_cli(
        "generate", "--system", "kdv1d", "--params-file", params_file,
        "--ics", N_ICS, "--seed", MASTER_SEED, "--out", DATASET,
        "--burn-in", 5.0, "--cadence", 0.25, "--horizon", 15.0, "--jobs", 4,
    )
    _run_benchmark_cli("split", "--dataset", DATASET, "--write")
    return DATASET


@pytest.fixture(scope="session")
def trained_variants(kdv_dataset):
    """Data-loss and residual-loss runs for three seeds, derivatives on/off."""
    from pdeinv_neural.data import DatasetIndex, WindowDataset
    from pdeinv_neural.model import FnoLite, FnoLiteConfig
    from pdeinv_neural.train import TrainConfig, train

    index = DatasetIndex.load(kdv_dataset)
    results = {}
    runs = [
        (seed, variant, alpha, beta, derivs, ics)
        for seed in (0, 1, 2)
        for variant, alpha, beta, derivs, ics in (
            ("data", 1.0, 0.0, True, None),
            ("data_noderiv", 1.0, 0.0, False, None),
            ("residual", 0.0, 1.0, True, None),
        )
    ]
    # one run trained on a fifth of the ICs, for adaptation on unseen ICs
    runs.append((0, "data_ic20", 1.0, 0.0, True, [0, 1, 2, 3]))
    for seed, variant, alpha, beta, derivs, ics in runs:
        train_set = WindowDataset(index, "train", "delta", window_stride=2,
                                  with_derivatives=derivs, ic_indices=ics)
        val_set = WindowDataset(index, "val", "delta", window_stride=10,
                                with_derivatives=derivs)
        sample = train_set[0]["inputs"]
        torch.manual_seed(seed)
        model = FnoLite(FnoLiteConfig(
            in_channels=sample.shape[0], resolution=tuple(sample.shape[1:]),
            hidden_channels=16, n_modes=16,
        ))
        result = train(model, train_set, val_set,
                       TrainConfig(epochs=30, seed=seed,
                                   alpha_data=alpha, beta_res=beta))
        results[(variant, seed)] = result
    return index, results
