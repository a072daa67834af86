import numpy as np
import pytest

import qreadout as qr
from qreadout import qrdio
from qreadout.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "bench.cfg"
    path.write_text(
        "master_seed = 7\n"
        "shots_per_state = 50\n"
        "tm_list_ns = 800\n"
        "methods = gmm\n"
        "repeats = 1\n"
        "states = 0,1\n"
    )
    return path


class TestExitCodes:
    def test_unknown_command_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_bad_config_key_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("no_such_key = 1\n")
        assert main(["benchmark", "--config", str(bad)]) == EXIT_USAGE

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        assert main(["inspect", str(tmp_path / "nope.qrdtraj")]) in (EXIT_DATA,)


class TestBenchmarkCommand:
    def test_benchmark_writes_reports(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["benchmark", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
        assert (out / "benchmark.csv").exists()
        assert (out / "benchmark.json").exists()
        assert "gmm" in capsys.readouterr().out

    def test_cli_overrides_config(self, config_file, tmp_path):
        out = tmp_path / "out"
        assert (
            main(
                [
                    "benchmark", "--config", str(config_file),
                    "--out-dir", str(out), "--repeats", "2", "--tm", "800,1600",
                ]
            )
            == EXIT_OK
        )
        rows = qrdio.read_report_csv(out / "benchmark.csv")
        assert len(rows) == 4  # 2 tms x 1 method x 2 repeats


class TestGenerateInspect:
    def test_generate_then_inspect(self, config_file, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(["generate", "--config", str(config_file), "--out-dir", str(out)]) == EXIT_OK
        capsys.readouterr()
        assert main(["inspect", str(out / "traj_tm800.qrdtraj")]) == EXIT_OK
        text = capsys.readouterr().out
        assert "QRD-TRAJ" in text and "checksum ok: True" in text

    def test_inspect_rejects_garbage(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"\x00\x01\x02")
        assert main(["inspect", str(path)]) == EXIT_DATA


class TestCompareCommand:
    def test_compare_identical_runs(self, config_file, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            assert main(
                ["benchmark", "--config", str(config_file), "--out-dir", str(out)]
            ) == EXIT_OK
        assert (
            main(
                [
                    "compare", str(out_a / "benchmark.csv"), str(out_b / "benchmark.csv"),
                    "--out", str(tmp_path / "cmp.csv"),
                ]
            )
            == EXIT_OK
        )
        rows = qrdio.read_report_csv(tmp_path / "cmp.csv")
        per_tm = [r for r in rows if r["kind"] == "per_tm"]
        assert all(float(r["diff_pp"]) == 0.0 for r in per_tm)


class TestLatentProbeCommand:
    def test_probe_family_cardinality(self, tmp_path):
        # train a small model, save it, probe through the CLI path
        import dataclasses

        from qreadout.bench import build_trajectory_dataset
        from qreadout.demod import fit_scaler

        sim = dataclasses.replace(qr.SimConfig(), master_seed=3)
        data = build_trajectory_dataset(sim, 30, (0, 1), 800.0)
        scaler = fit_scaler(data.features)
        model = qr.train_pretrann(
            scaler.transform(data.features), data.labels, scaler=scaler, seed=1
        )
        model_path = tmp_path / "m.qrdmodel"
        qrdio.save_model(model_path, model)
        data_path = tmp_path / "d.qrdtraj"
        qrdio.write_traj_dataset(data_path, data.features, data.labels, {})
        out = tmp_path / "probe.csv"
        code = main(
            [
                "latent-probe", "--model", str(model_path), "--data", str(data_path),
                "--shot-index", "0", "--component", "1",
                "--values=-0.5,-0.25,0,0.25,0.5", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        rows = qrdio.read_report_csv(out)
        assert [r["kind"] for r in rows[:2]] == ["input", "reconstruction"]
        assert sum(r["kind"] == "probe" for r in rows) == 5

    def test_bad_shot_index_is_usage_error(self, tmp_path):
        assert (
            main(
                [
                    "latent-probe", "--model", str(tmp_path / "x"), "--data",
                    str(tmp_path / "y"), "--shot-index", "0", "--component", "0",
                    "--values", "0",
                ]
            )
            == EXIT_DATA
        )


def test_numeric_exit_code_available():
    assert EXIT_NUMERIC == 3
