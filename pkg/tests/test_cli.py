import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from pdeinv.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def checksum(root):
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*.bin")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


@pytest.fixture(scope="module")
def kdv_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_kdv")
    code = run_cli(
        "generate", "--system", "kdv1d", "--n-params", 5, "--ics", 2,
        "--seed", 7, "--out", root, "--resolution", 64,
        "--burn-in", 0.5, "--cadence", 0.25, "--horizon", 2.0,
    )
    assert code == 0
    assert run_cli("split", "--dataset", root, "--write") == 0
    return root


class TestGenerate:
    def test_rerun_identical_checksums(self, tmp_path):
        args = ["generate", "--system", "kdv1d", "--n-params", 2, "--ics", 1,
                "--seed", 7, "--resolution", 64, "--burn-in", 0.2,
                "--cadence", 0.25, "--horizon", 0.5]
        assert run_cli(*args, "--out", tmp_path / "a") == 0
        assert run_cli(*args, "--out", tmp_path / "b") == 0
        assert checksum(tmp_path / "a") == checksum(tmp_path / "b")

    def test_run_json_written(self, kdv_dataset):
        record = json.loads((kdv_dataset / "run_generate.json").read_text())
        assert record["command"] == "generate"
        assert record["config"]["seed"] == 7
        assert "version" in record

    def test_env_seed_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PDEINV_SEED", "7")
        args = ["generate", "--system", "kdv1d", "--n-params", 2, "--ics", 1,
                "--seed", 99, "--resolution", 64, "--burn-in", 0.2,
                "--cadence", 0.25, "--horizon", 0.5]
        assert run_cli(*args, "--out", tmp_path / "env") == 0
        monkeypatch.delenv("PDEINV_SEED")
        assert run_cli(*args[:8], "7", *args[9:], "--out", tmp_path / "plain") == 0
        assert checksum(tmp_path / "env") == checksum(tmp_path / "plain")

    def test_unknown_system_exits_2(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            run_cli("generate", "--system", "heat3d", "--out", tmp_path)


class TestSplitCommand:
    def test_counts_reported(self, kdv_dataset, capsys):
        assert run_cli("split", "--dataset", kdv_dataset) == 0
        counts = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert sum(counts.values()) == 5

    def test_101_value_band_arithmetic(self, capsys):
        # the 10%-per-end and middle-20% bands of a 101-value log grid hold
        # 11 values per extreme end and 21 non-extreme values
        from pdeinv.pipeline import build_splits, param_grid
        from pdeinv.systems import get_system

        ns = get_system("ns2d_unforced")
        splits = build_splits(param_grid(ns, counts={"nu": 101}), ns)
        counts = {lab: splits.labels.count(lab) for lab in set(splits.labels)}
        assert counts["ood_extreme"] == 22
        assert counts["ood_nonextreme"] == 21
        assert counts["train"] + counts["val"] + counts["test_id"] == 58


class TestInvert:
    def test_lsq_rows_and_mean(self, kdv_dataset, tmp_path, capsys):
        out = tmp_path / "pred.jsonl"
        code = run_cli("invert", "--dataset", kdv_dataset, "--method", "lsq",
                       "--window-stride", 4, "--out", out)
        assert code == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert rows, "no inversion rows produced"
        for row in rows:
            assert set(row) >= {"param_idx", "ic_idx", "window_start",
                                "phi_hat", "residual_at_hat", "relative_error"}
            assert "delta" in row["phi_hat"]
        err = capsys.readouterr().err
        assert "mean relative error" in err

    def test_scan_single_candidate(self, kdv_dataset, tmp_path):
        out = tmp_path / "scan.jsonl"
        code = run_cli("invert", "--dataset", kdv_dataset, "--method", "scan",
                       "--scan-grid", "2.0", "--no-refine",
                       "--window-stride", 8, "--out", out)
        assert code == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(row["phi_hat"]["delta"] == 2.0 for row in rows)

    def test_split_filter(self, kdv_dataset, tmp_path):
        out = tmp_path / "ood.jsonl"
        code = run_cli("invert", "--dataset", kdv_dataset, "--method", "lsq",
                       "--split", "ood-extreme", "--window-stride", 8, "--out", out)
        assert code == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert {row["param_idx"] for row in rows} == {0, 4}


class TestEval:
    def test_roundtrip_against_invert(self, kdv_dataset, tmp_path, capsys):
        out = tmp_path / "pred.jsonl"
        run_cli("invert", "--dataset", kdv_dataset, "--method", "lsq",
                "--window-stride", 4, "--out", out)
        capsys.readouterr()
        assert run_cli("eval", "--pred", out, "--dataset", kdv_dataset) == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        local_mean = np.mean([r["relative_error"] for r in rows])
        assert abs(report["mean"] - local_mean) < 1e-6
        assert report["system"] == "kdv1d"

    def test_missing_pred_file_exits_4(self, kdv_dataset):
        assert run_cli("eval", "--pred", "/nonexistent.jsonl",
                       "--dataset", kdv_dataset) == 4


@pytest.fixture(scope="module")
def ns_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_ns")
    code = run_cli("generate", "--system", "ns2d-unforced", "--n-params", 2,
                   "--ics", 1, "--seed", 3, "--out", root,
                   "--resolution", 64, "--output-resolution", 64,
                   "--burn-in", 0.2, "--cadence", 0.1, "--horizon", 0.3)
    assert code == 0
    return root


class TestSpectraCommand:
    def test_spectrum_csv(self, ns_dataset, tmp_path):
        out = tmp_path / "spec.csv"
        code = run_cli("spectra", "--traj", ns_dataset / "traj" / "p0_ic0.bin",
                       "--out", out)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,E"
        assert len(lines) > 10

    def test_self_consistency(self, ns_dataset, capsys):
        # stored frames are f32, so the resimulated run matches only to
        # storage rounding; the true parameter must still beat a wrong one
        manifest = json.loads((ns_dataset / "manifest.json").read_text())
        nu = manifest["param_values"][0]["nu"]
        code = run_cli("spectra", "--traj", ns_dataset / "traj" / "p0_ic0.bin",
                       "--self-consistency", "--phi-hat", nu)
        assert code == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert report["diverged"] is False
        assert report["mean_distance"] < 0.05
        code = run_cli("spectra", "--traj", ns_dataset / "traj" / "p0_ic0.bin",
                       "--self-consistency", "--phi-hat", 10 * nu)
        assert code == 0
        wrong = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert wrong["mean_distance"] > report["mean_distance"]


class TestDegradeCommand:
    def test_snp_writes_dataset(self, kdv_dataset, tmp_path):
        out = tmp_path / "noisy"
        code = run_cli("degrade", "--dataset", kdv_dataset, "--op", "snp",
                       "--p", 0.3, "--seed", 1, "--out", out)
        assert code == 0
        assert (out / "manifest.json").exists()
        assert len(list((out / "traj").glob("*.bin"))) == 10
        assert len(list((out / "traj").glob("*.mask.npy"))) == 10


class TestSubsetCommand:
    def test_view_written(self, kdv_dataset, tmp_path):
        out = tmp_path / "view"
        code = run_cli("subset", "--dataset", kdv_dataset, "--ic-frac", 0.5,
                       "--horizon-frac", 0.5, "--out", out)
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert "view" in manifest


def test_entry_point_subprocess():
    out = subprocess.run([sys.executable, "-m", "pdeinv.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
