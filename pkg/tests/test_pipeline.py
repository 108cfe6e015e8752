import hashlib

import numpy as np
import pytest

from pdeinv.errors import EmptyTrainSplitError, InvalidConfigError
from pdeinv.grid import CoefficientField, Grid, ParamVector, single_param
from pdeinv.io import read_manifest, validate_manifest, write_manifest
from pdeinv.pipeline import (
    GenerationSpec,
    SplitConfig,
    SubsetSpec,
    assign_splits,
    band_edges,
    build_darcy_splits,
    build_splits,
    darcy_split_stat,
    generate_dataset,
    param_grid,
    subset_dataset,
)
from pdeinv.solvers import SolverConfig
from pdeinv.systems import get_system

KDV = get_system("kdv1d")
NS = get_system("ns2d_unforced")
TF = get_system("ns2d_forced")
RD = get_system("rd2d")


def kdv_gen_spec(n_deltas=5, n_ics=2, seed=0, horizon=2.0):
    params = param_grid(KDV, counts={"delta": n_deltas})
    config = SolverConfig(internal_resolution=(64,), output_resolution=(64,),
                          burn_in_s=0.5, record_interval_s=0.25, horizon_s=horizon,
                          dt=None, rtol=1e-7, atol=1e-7)
    return GenerationSpec(system_id="kdv1d", param_values=params, n_ics=n_ics,
                          master_seed=seed, solver_config=config)


def dataset_checksum(root):
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*.bin")):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


class TestParamGrid:
    def test_kdv_linear_spacing(self):
        values = [pv.get("delta") for pv in param_grid(KDV, counts={"delta": 5})]
        assert np.allclose(values, [0.8, 1.85, 2.9, 3.95, 5.0])

    def test_ns_log_endpoints_exact(self):
        values = [pv.get("nu") for pv in param_grid(NS, counts={"nu": 101})]
        assert values[0] == 1e-4 and values[-1] == 1e-2
        ratios = np.diff(np.log(values))
        assert np.allclose(ratios, ratios[0])

    def test_rd_cartesian_product(self):
        grid = param_grid(RD, counts={"Du": 3, "Dv": 2, "k": 2})
        assert len(grid) == 12
        assert all(set(pv.names) == {"Du", "Dv", "k"} for pv in grid)


class TestGeneration:
    def test_kdv_mini_dataset(self, tmp_path):
        spec = kdv_gen_spec()
        manifest = generate_dataset(spec, tmp_path)
        assert validate_manifest(manifest) == []
        assert [pv.get("delta") for pv in manifest.param_values] == \
            pytest.approx([0.8, 1.85, 2.9, 3.95, 5.0])
        bins = sorted(p.name for p in (tmp_path / "traj").glob("*.bin"))
        assert len(bins) == 10
        traj = manifest.load_trajectory(2, 1)
        assert traj.n_frames == 9
        assert traj.values.dtype == np.float32

    def test_rerun_byte_identical(self, tmp_path):
        generate_dataset(kdv_gen_spec(n_deltas=2, horizon=1.0), tmp_path / "a")
        generate_dataset(kdv_gen_spec(n_deltas=2, horizon=1.0), tmp_path / "b")
        assert dataset_checksum(tmp_path / "a") == dataset_checksum(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        generate_dataset(kdv_gen_spec(n_deltas=2, seed=0, horizon=1.0), tmp_path / "a")
        generate_dataset(kdv_gen_spec(n_deltas=2, seed=1, horizon=1.0), tmp_path / "b")
        assert dataset_checksum(tmp_path / "a") != dataset_checksum(tmp_path / "b")

    def test_parallel_generation_identical(self, tmp_path):
        import dataclasses

        spec = kdv_gen_spec(n_deltas=2, horizon=1.0)
        generate_dataset(spec, tmp_path / "serial")
        generate_dataset(dataclasses.replace(spec, jobs=2), tmp_path / "parallel")
        assert dataset_checksum(tmp_path / "serial") == dataset_checksum(tmp_path / "parallel")

    def test_darcy_generation_with_stats(self, tmp_path):
        config = SolverConfig(internal_resolution=(41, 41), output_resolution=(41, 41),
                              burn_in_s=0.0, record_interval_s=1.0, horizon_s=0.0)
        spec = GenerationSpec(system_id="darcy2d",
                              param_values=[ParamVector(entries=()) for _ in range(4)],
                              n_ics=1, master_seed=3, solver_config=config)
        manifest = generate_dataset(spec, tmp_path)
        assert validate_manifest(manifest) == []
        assert len(manifest.darcy_stats) == 4
        assert all(0.0 < s < 1.0 for s in manifest.darcy_stats)
        coeff = manifest.load_coefficient(0, 0)
        assert set(np.unique(coeff.values)) <= {3.0, 12.0}


class TestSplits:
    def test_kdv_bands_match_reference_intervals(self):
        values = param_grid(KDV, counts={"delta": 100})
        splits = build_splits(values, KDV)
        edges = band_edges(KDV, "delta", SplitConfig())
        (lo_band, hi_band) = edges["extreme"]
        assert np.allclose(lo_band, (0.8, 1.22))
        assert np.allclose(hi_band, (4.58, 5.0))
        assert np.allclose(edges["nonextreme"], (2.48, 3.32))
        for pv, lab in zip(values, splits.labels):
            d = pv.get("delta")
            if d <= 1.22 or d >= 4.58:
                assert lab == "ood_extreme"
            elif 2.48 <= d <= 3.32:
                assert lab == "ood_nonextreme"
            else:
                assert lab in ("train", "val", "test_id")

    def test_ns_log_bands(self):
        edges = band_edges(NS, "nu", SplitConfig())
        (lo_band, hi_band) = edges["extreme"]
        assert np.allclose(lo_band, (1e-4, 10 ** -3.8))
        assert np.allclose(hi_band, (10 ** -2.2, 1e-2))
        assert np.allclose(edges["nonextreme"], (10 ** -3.2, 10 ** -2.8))

    def test_forced_log_bands(self):
        edges = band_edges(TF, "nu", SplitConfig())
        (lo_band, hi_band) = edges["extreme"]
        assert np.allclose(lo_band, (1e-5, 10 ** -4.7))
        assert np.allclose(hi_band, (10 ** -2.3, 1e-2))
        assert np.allclose(edges["nonextreme"], (10 ** -3.8, 10 ** -3.2))

    def test_degenerate_config_everything_trainable(self):
        values = param_grid(KDV, counts={"delta": 10})
        cfg = SplitConfig(extreme_frac=0.0, middle_band=(0.5, 0.5),
                          val_frac=0.0, test_frac=0.0)
        splits = build_splits(values, KDV, cfg)
        assert all(lab == "train" for lab in splits.labels)

    def test_labels_partition(self):
        values = param_grid(NS, counts={"nu": 101})
        splits = build_splits(values, NS)
        assert len(splits.labels) == 101
        assert set(splits.labels) == {"train", "val", "test_id",
                                      "ood_nonextreme", "ood_extreme"}

    def test_multiparam_hypercube_against_box_oracle(self):
        rng = np.random.default_rng(0)
        values = []
        for _ in range(1000):
            values.append(ParamVector(entries=(
                ("Du", rng.uniform(0.01, 0.5)),
                ("Dv", rng.uniform(0.01, 0.5)),
                ("k", rng.uniform(0.005, 0.1)),
            )))
        splits = build_splits(values, RD)
        cfg = SplitConfig()
        for pv, lab in zip(values, splits.labels):
            fracs = [(pv.get(n) - RD.param_ranges[n][0])
                     / (RD.param_ranges[n][1] - RD.param_ranges[n][0])
                     for n in pv.names]
            any_extreme = any(f <= cfg.extreme_frac or f >= 1 - cfg.extreme_frac
                              for f in fracs)
            all_middle = all(cfg.middle_band[0] <= f <= cfg.middle_band[1]
                             for f in fracs)
            if any_extreme:
                assert lab == "ood_extreme"
            elif all_middle:
                assert lab == "ood_nonextreme"
            else:
                assert lab in ("train", "val", "test_id")

    def test_bands_exhausting_everything_fails(self):
        values = [single_param("delta", 0.9), single_param("delta", 4.9)]
        with pytest.raises(EmptyTrainSplitError):
            build_splits(values, KDV)


class TestDarcySplits:
    def test_stat_extremes(self):
        g = Grid(shape=(8, 8), domain=((0.0, 1.0),) * 2, periodic=(False, False))
        all12 = CoefficientField(grid=g, values=np.full((8, 8), 12.0))
        all3 = CoefficientField(grid=g, values=np.full((8, 8), 3.0))
        assert darcy_split_stat(all12) == 1.0
        assert darcy_split_stat(all3) == 0.0
        half = np.full((8, 8), 3.0)
        half[:4] = 12.0
        assert darcy_split_stat(CoefficientField(grid=g, values=half)) == 0.5

    def test_tails_labeled_extreme(self):
        rng = np.random.default_rng(1)
        stats = list(0.5 + 0.05 * rng.standard_normal(200))
        splits = build_darcy_splits(stats)
        arr = np.asarray(stats)
        mu, sd = arr.mean(), arr.std()
        for s, lab in zip(stats, splits.labels):
            if abs(s - mu) > 1.5 * sd:
                assert lab == "ood_extreme"
            else:
                assert lab != "ood_nonextreme"


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    manifest = generate_dataset(kdv_gen_spec(n_deltas=8, n_ics=5), root)
    assign_splits(manifest, SplitConfig(val_frac=0.0, test_frac=0.0))
    write_manifest(manifest, root)
    return read_manifest(root)


class TestSubset:
    def test_ic_fraction_ceil(self, dataset):
        view = subset_dataset(dataset, SubsetSpec(ic_fraction=0.2), seed=0)
        for p in view.view["param_indices"]:
            assert len(view.view["ic_indices"][str(p)]) == 1

    def test_param_fraction_identity(self, dataset):
        view = subset_dataset(dataset, SubsetSpec(param_fraction=1.0), seed=0)
        assert view.view["param_indices"] == list(range(8))

    def test_param_fraction_keeps_endpoints(self, dataset):
        view = subset_dataset(dataset, SubsetSpec(param_fraction=0.5), seed=0)
        train = [i for i, lab in enumerate(dataset.splits.labels) if lab == "train"]
        kept_train = [p for p in view.view["param_indices"] if p in train]
        values = sorted(dataset.param_values[p].get("delta") for p in train)
        kept_vals = sorted(dataset.param_values[p].get("delta") for p in kept_train)
        assert kept_vals[0] == values[0] and kept_vals[-1] == values[-1]

    def test_horizon_truncation(self, dataset):
        n_frames = dataset.load_trajectory(0, 0).n_frames
        view = subset_dataset(dataset, SubsetSpec(horizon_fraction=0.75), seed=0)
        assert view.view["horizon_frames"] == int(np.ceil(0.75 * n_frames))
        traj = view.load_trajectory(view.view["param_indices"][0],
                                    view.view["ic_indices"][str(view.view["param_indices"][0])][0])
        assert traj.n_frames == view.view["horizon_frames"]

    def test_view_references_not_copies(self, dataset, tmp_path):
        view = subset_dataset(dataset, SubsetSpec(ic_fraction=0.4), seed=0)
        out = tmp_path / "view"
        write_manifest(view, out)
        assert list(out.glob("traj/*.bin")) == []
        back = read_manifest(out)
        traj = back.load_trajectory(back.view["param_indices"][0],
                                    back.view["ic_indices"][str(back.view["param_indices"][0])][0])
        assert traj.n_frames > 0

    def test_deterministic_in_seed(self, dataset):
        a = subset_dataset(dataset, SubsetSpec(ic_fraction=0.4), seed=5)
        b = subset_dataset(dataset, SubsetSpec(ic_fraction=0.4), seed=5)
        assert a.view == b.view

    def test_invalid_fraction(self):
        with pytest.raises(InvalidConfigError):
            SubsetSpec(ic_fraction=0.0)

    def test_eval_tail_reserved(self, dataset):
        n_frames = dataset.load_trajectory(0, 0).n_frames
        view = subset_dataset(dataset, SubsetSpec(horizon_fraction=0.5), seed=0)
        start, end = view.view["eval_frame_range"]
        assert end == n_frames
        assert start == int(np.ceil(0.75 * n_frames))
