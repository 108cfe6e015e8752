import json
import subprocess
import sys


def test_train_command_exports_scoreable_predictions(kdv_dataset, tmp_path):
    pred = tmp_path / "pred.jsonl"
    res = subprocess.run(
        [sys.executable, "-m", "pdeinv_neural.cli", "train",
         "--dataset", str(kdv_dataset), "--epochs", "2", "--hidden", "8",
         "--modes", "8", "--seed", "0", "--eval-split", "ood_extreme",
         "--out", str(pred)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    rows = [json.loads(l) for l in pred.read_text().splitlines()]
    assert rows and all("delta" in r["phi_hat"] for r in rows)

    scored = subprocess.run(
        [sys.executable, "-m", "pdeinv.cli", "eval", "--pred", str(pred),
         "--dataset", str(kdv_dataset), "--split", "ood-extreme"],
        capture_output=True, text=True,
    )
    assert scored.returncode == 0, scored.stderr
    report = json.loads(scored.stdout.strip().splitlines()[-1])
    assert report["n_windows"] == len(rows)
