"""Minimal command line: train on a dataset, write predictions for a split."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import torch

from .data import DatasetIndex, WindowDataset
from .model import FnoLite, FnoLiteConfig
from .predict import export_predictions
from .train import TrainConfig, evaluate, train
from .ttt import TttConfig, ttt


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pdeinv-neural")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train and export predictions")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--target", default=None)
    tr.add_argument("--epochs", type=int, default=30)
    tr.add_argument("--hidden", type=int, default=16)
    tr.add_argument("--modes", type=int, default=16)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--beta-res", type=float, default=0.0)
    tr.add_argument("--alpha-data", type=float, default=1.0)
    tr.add_argument("--no-derivatives", action="store_true")
    tr.add_argument("--ttt", action="store_true", help="adapt on the eval split")
    tr.add_argument("--eval-split", default="ood_extreme")
    tr.add_argument("--out", required=True, help="predictions JSON-lines path")
    tr.add_argument("--checkpoint", help="optional model state_dict path")

    args = parser.parse_args(argv)
    index = DatasetIndex.load(args.dataset)
    target = args.target or index.param_names[0]
    with_derivs = not args.no_derivatives

    train_set = WindowDataset(index, "train", target, with_derivatives=with_derivs)
    val_set = WindowDataset(index, "val", target, window_stride=10,
                            with_derivatives=with_derivs)
    sample = train_set[0]["inputs"]
    config = FnoLiteConfig(in_channels=sample.shape[0],
                           resolution=tuple(sample.shape[1:]),
                           hidden_channels=args.hidden, n_modes=args.modes)
    torch.manual_seed(args.seed)
    model = FnoLite(config)
    result = train(model, train_set, val_set,
                   TrainConfig(epochs=args.epochs, seed=args.seed,
                               alpha_data=args.alpha_data, beta_res=args.beta_res))
    print(f"best val relative error {result.best_val_error:.4f} "
          f"at epoch {result.best_epoch}", file=sys.stderr)

    eval_set = WindowDataset(index, args.eval_split, target, window_stride=10,
                             with_derivatives=with_derivs)
    if args.ttt:
        out = ttt(model, eval_set, TttConfig())
        lines = []
        for ref, value in zip(eval_set.refs, out.predictions):
            lines.append(json.dumps({
                "param_idx": ref.param_idx, "ic_idx": ref.ic_idx,
                "window_start": ref.start, "phi_hat": {target: float(value)},
            }, sort_keys=True))
        Path(args.out).write_text("\n".join(lines) + "\n")
    else:
        export_predictions(model, eval_set, args.out)
    if args.checkpoint:
        torch.save(model.state_dict(), args.checkpoint)
    print(f"eval split error {evaluate(model, eval_set):.4f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
