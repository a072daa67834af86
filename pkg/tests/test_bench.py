import dataclasses

import numpy as np
import pytest

import qreadout as qr
from qreadout import qrdio
from qreadout.bench import (
    DEFAULT_LATENT_FRACTIONS,
    DEFAULT_TM_LIST,
    TIMING_COLUMNS,
    ExperimentConfig,
    compare_reports,
    generate_datasets,
    run_benchmark,
    shuffle_split,
    sweep_dataset,
    sweep_latent,
)
from qreadout.errors import ConfigError


def tiny_config(**overrides):
    sim = dataclasses.replace(qr.SimConfig(), master_seed=overrides.pop("master_seed", 31))
    defaults = dict(
        sim=sim,
        tm_list_ns=(800.0,),
        methods=("gmm",),
        repeats=2,
        shots_per_state=80,
        states=(0, 1),
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


def strip_timing(rows):
    return [{k: v for k, v in row.items() if k not in TIMING_COLUMNS} for row in rows]


class TestConfig:
    def test_default_tm_grid(self):
        assert DEFAULT_TM_LIST == tuple(float(t) for t in range(800, 8001, 800))

    def test_default_latent_fractions_has_seven_entries(self):
        assert len(DEFAULT_LATENT_FRACTIONS) == 7

    def test_tm_must_be_slice_multiple(self):
        with pytest.raises(ConfigError):
            tiny_config(tm_list_ns=(810.0,))

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            tiny_config(methods=("svm",))

    def test_bad_split_rejected(self):
        with pytest.raises(ConfigError):
            tiny_config(split_fraction=1.0)


class TestShuffleSplit:
    def test_disjoint_and_exhaustive(self, rng):
        train, test = shuffle_split(100, 0.75, rng)
        assert len(train) == 75 and len(test) == 25
        assert set(train) | set(test) == set(range(100))
        assert set(train) & set(test) == set()

    def test_label_multiset_preserved(self, rng):
        labels = np.array([0] * 40 + [1] * 60)
        train, test = shuffle_split(100, 0.75, rng)
        combined = np.sort(np.concatenate([labels[train], labels[test]]))
        np.testing.assert_array_equal(combined, np.sort(labels))

    def test_empty_side_rejected(self, rng):
        with pytest.raises(ConfigError):
            shuffle_split(3, 0.99, rng)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    cfg = tiny_config(
        tm_list_ns=(800.0, 1600.0), methods=("gmm", "pretrann"), repeats=2,
        shots_per_state=60,
    )
    out = tmp_path_factory.mktemp("bench")
    report = run_benchmark(cfg, out)
    return cfg, out, report


class TestRunBenchmark:
    def test_row_cardinality(self, small_run):
        cfg, _, report = small_run
        expected = len(cfg.tm_list_ns) * len(cfg.methods) * cfg.repeats
        assert len(report["rows"]) == expected

    def test_rows_carry_seed_and_config_hash(self, small_run):
        cfg, _, report = small_run
        for row in report["rows"]:
            assert row["config_hash"] == cfg.hash()
            assert int(row["seed"]) >= 0

    def test_csv_and_json_written(self, small_run):
        _, out, report = small_run
        rows = qrdio.read_report_csv(out / "benchmark.csv")
        assert len(rows) == len(report["rows"])
        payload = qrdio.read_report_json(out / "benchmark.json")
        assert payload["aggregates"] == report["aggregates"]

    def test_same_seed_reproduces_rows(self, small_run, tmp_path):
        cfg, out, _ = small_run
        second = run_benchmark(cfg, tmp_path / "again")
        rows_a = qrdio.read_report_csv(out / "benchmark.csv")
        rows_b = qrdio.read_report_csv(tmp_path / "again" / "benchmark.csv")
        assert strip_timing(rows_a) == strip_timing(rows_b)

    def test_different_seed_changes_rows(self, small_run, tmp_path):
        cfg, out, _ = small_run
        other = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, master_seed=99)
        )
        run_benchmark(other, tmp_path / "other")
        rows_a = strip_timing(qrdio.read_report_csv(out / "benchmark.csv"))
        rows_b = strip_timing(qrdio.read_report_csv(tmp_path / "other" / "benchmark.csv"))
        assert rows_a != rows_b

    def test_threaded_run_matches_serial(self, small_run, tmp_path):
        cfg, out, _ = small_run
        run_benchmark(cfg, tmp_path / "threaded", threads=4)
        rows_a = strip_timing(qrdio.read_report_csv(out / "benchmark.csv"))
        rows_b = strip_timing(qrdio.read_report_csv(tmp_path / "threaded" / "benchmark.csv"))
        assert rows_a == rows_b

    def test_split_is_shared_across_methods(self, small_run):
        _, _, report = small_run
        by_key = {}
        for row in report["rows"]:
            by_key.setdefault((row["tm_ns"], row["repeat"]), set()).add(row["seed"])
        for seeds in by_key.values():
            assert len(seeds) == 1  # same split seed for every method


class TestGenerate:
    def test_files_and_record_counts(self, tmp_path):
        cfg = tiny_config(tm_list_ns=(2400.0,), shots_per_state=10)
        files = generate_datasets(cfg, tmp_path)
        assert [f.suffix for f in files] == [".qrdraw", ".qrdtraj", ".qrdiq"]
        feats, labels, fields = qrdio.read_traj_dataset(tmp_path / "traj_tm2400.qrdtraj")
        assert feats.shape == (20, 300)  # C = 150 per quadrature
        assert fields["dt_ns"] == "16.0"
        shots, _ = qrdio.read_raw_dataset(tmp_path / "shots_tm2400.qrdraw")
        assert len(shots) == 20

    def test_regeneration_is_byte_identical(self, tmp_path):
        cfg = tiny_config(tm_list_ns=(800.0,), shots_per_state=8)
        generate_datasets(cfg, tmp_path / "a")
        generate_datasets(cfg, tmp_path / "b")
        for name in ("shots_tm800.qrdraw", "traj_tm800.qrdtraj", "iq_tm800.qrdiq"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestSweeps:
    def test_latent_rows_and_dims(self, tmp_path):
        cfg = tiny_config(shots_per_state=40)
        rows = sweep_latent(
            cfg, tmp_path, fractions=(1.0, 0.25), tm_ns=800.0, repeats=1
        )
        assert len(rows) == 2
        assert rows[1]["latent_dim"] == "25"  # 100-dim features at 1/4

    def test_latent_fraction_quarter_of_300_is_75(self):
        assert qr.AutoencoderSpec(300, 0.25).latent_dim == 75

    def test_default_fraction_set_yields_seven_rows(self, tmp_path):
        # cardinality only; the full-scale runtime lives in the acceptance suite
        cfg = tiny_config(shots_per_state=20)
        rows = sweep_latent(cfg, tmp_path, tm_ns=800.0, repeats=1)
        assert len(rows) == 7

    def test_dataset_rows_and_cardinality(self, tmp_path):
        cfg = tiny_config(shots_per_state=40)
        rows = sweep_dataset(cfg, tmp_path, sizes=(40, 80, 120), tm_ns=800.0, repeats=1)
        assert len(rows) == 3
        assert [r["size"] for r in rows] == ["40", "80", "120"]
        curves = qrdio.read_report_csv(tmp_path / "sweep_dataset_losses.csv")
        assert {c["size"] for c in curves} == {"40", "80", "120"}

    def test_dataset_size_below_states_rejected(self, tmp_path):
        cfg = tiny_config()
        with pytest.raises(ConfigError):
            sweep_dataset(cfg, tmp_path, sizes=(1,), tm_ns=800.0, repeats=1)

    def test_bad_fraction_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            sweep_latent(tiny_config(), tmp_path, fractions=(1.5,), repeats=1)

    def test_latent_sweep_training_time_falls_with_latent_size(self, tmp_path):
        # a full-width latent has ~4x the parameters of a 1/10 one, so the
        # endpoint average training times are well separated
        cfg = tiny_config(
            master_seed=55, tm_list_ns=(2400.0,), shots_per_state=400, repeats=2
        )
        rows = sweep_latent(
            cfg, tmp_path, fractions=(1.0, 0.1), tm_ns=2400.0, repeats=2
        )
        t_full = float(rows[0]["train_s_mean"])
        t_tenth = float(rows[1]["train_s_mean"])
        assert t_full > t_tenth, (t_full, t_tenth)


class TestCompare:
    def _write_report(self, path, curves):
        rows = []
        for method, tms in curves.items():
            for tm, acc in tms.items():
                rows.append(
                    {
                        "method": method,
                        "tm_ns": repr(float(tm)),
                        "repeat": "0",
                        "global_accuracy": repr(acc),
                    }
                )
        qrdio.write_report_csv(
            path, rows, ["method", "tm_ns", "repeat", "global_accuracy"]
        )

    def test_identical_reports_give_zero_differences(self, tmp_path):
        curves = {"gmm": {800: 0.8, 1600: 0.9}, "pretrann": {800: 0.85, 1600: 0.9}}
        self._write_report(tmp_path / "a.csv", curves)
        self._write_report(tmp_path / "b.csv", curves)
        rows = compare_reports(tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv")
        per_tm = [r for r in rows if r["kind"] == "per_tm"]
        assert per_tm and all(float(r["diff_pp"]) == 0.0 for r in per_tm)

    def test_five_point_difference(self, tmp_path):
        self._write_report(tmp_path / "a.csv", {"gmm": {800: 0.95}})
        self._write_report(tmp_path / "b.csv", {"gmm": {800: 0.90}})
        rows = compare_reports(tmp_path / "a.csv", tmp_path / "b.csv", None)
        per_tm = [r for r in rows if r["kind"] == "per_tm"]
        assert float(per_tm[0]["diff_pp"]) == pytest.approx(5.0)

    def test_advantage_flag(self, tmp_path):
        # report b (three-state analog) has the larger pretrained-vs-GMM mean gap
        self._write_report(
            tmp_path / "a.csv", {"gmm": {800: 0.90, 2400: 0.95}, "pretrann": {800: 0.92, 2400: 0.95}}
        )
        self._write_report(
            tmp_path / "b.csv", {"gmm": {800: 0.80, 2400: 0.90}, "pretrann": {800: 0.88, 2400: 0.93}}
        )
        rows = compare_reports(tmp_path / "a.csv", tmp_path / "b.csv", None)
        flag = [r for r in rows if r["kind"] == "advantage_flag_b_geq_a"]
        assert len(flag) == 1 and float(flag[0]["diff_pp"]) == 1.0
        mean_long = [r for r in rows if r["kind"] == "mean_long"]
        assert {r["method"] for r in mean_long} == {"gmm", "pretrann"}

    def test_mismatched_grids_rejected(self, tmp_path):
        self._write_report(tmp_path / "a.csv", {"gmm": {800: 0.9}})
        self._write_report(tmp_path / "b.csv", {"gmm": {1600: 0.9}})
        with pytest.raises(ConfigError):
            compare_reports(tmp_path / "a.csv", tmp_path / "b.csv", None)

    def test_no_shared_methods_rejected(self, tmp_path):
        self._write_report(tmp_path / "a.csv", {"gmm": {800: 0.9}})
        self._write_report(tmp_path / "b.csv", {"ffnn": {800: 0.9}})
        with pytest.raises(ConfigError):
            compare_reports(tmp_path / "a.csv", tmp_path / "b.csv", None)


class TestFailurePolicy:
    def test_failed_cell_recorded_and_excluded(self, tmp_path, monkeypatch):
        import qreadout.bench as bench_mod

        original = bench_mod._run_cell
        calls = {"n": 0}

        def flaky(cfg, data, method, repeat):
            calls["n"] += 1
            if repeat == 1:
                raise qr.NumericError("synthetic failure")
            return original(cfg, data, method, repeat)

        monkeypatch.setattr(bench_mod, "_run_cell", flaky)
        cfg = tiny_config(repeats=3, shots_per_state=40)
        with pytest.warns(UserWarning, match="synthetic failure"):
            report = run_benchmark(cfg, tmp_path)
        assert len(report["failures"]) == 1
        assert report["failures"][0]["repeat"] == 1
        assert len(report["rows"]) == 2
        assert report["aggregates"][0]["n_repeats"] == 2
