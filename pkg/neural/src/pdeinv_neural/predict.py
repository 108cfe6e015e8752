"""Prediction export in the benchmark's JSON-lines interchange format."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .data import WindowDataset
from .model import FnoLite


@torch.no_grad()
def predict_windows(model: FnoLite, dataset: WindowDataset,
                    batch_size: int = 64) -> np.ndarray:
    model.eval()
    preds = []
    for lo in range(0, len(dataset), batch_size):
        batch = torch.stack([dataset[i]["inputs"]
                             for i in range(lo, min(lo + batch_size, len(dataset)))])
        preds.append(model(batch).numpy())
    return np.concatenate(preds) if preds else np.zeros(0)


def export_predictions(model: FnoLite, dataset: WindowDataset,
                       out_path: str | Path) -> Path:
    """One JSON line per window: {param_idx, ic_idx, window_start, phi_hat}."""
    out_path = Path(out_path)
    preds = predict_windows(model, dataset)
    lines = []
    for ref, value in zip(dataset.refs, preds):
        lines.append(json.dumps({
            "param_idx": ref.param_idx,
            "ic_idx": ref.ic_idx,
            "window_start": ref.start,
            "phi_hat": {dataset.target: float(value)},
        }, sort_keys=True))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return out_path
