"""CLI surface: exit codes, file emission, figure siblings, determinism."""
import json
import subprocess
import sys

import pytest

from skinflow import Dataset, NumericalError
from skinflow.cli import WORKERS_ENV, _resolve_workers, main
from skinflow.config import load_config

CHEAP_TRAJECTORY = """\
trajectory.s = 10.0
trajectory.length = 31.4
trajectory.n_samples = 64
"""

CHEAP_SWEEP = """\
sweep.gamma_min = -0.85
sweep.gamma_max = -0.15
sweep.n_steps = 10
sweep.relax_periods = 20.0
"""

CHEAP_FIG2 = """\
trajectory.length = 15.8
trajectory.n_samples = 32
classifier.base_length = 15.8
classifier.max_doublings = 3
"""


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    return tmp_path


def write_config(tmp_path, text):
    path = tmp_path / "run.conf"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestDispatch:
    def test_no_args(self, capsys):
        assert main([]) == 4
        assert "usage" in capsys.readouterr().err

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 4
        assert "unknown command" in capsys.readouterr().err

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "predict" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        assert main(["predict", "--bogus"]) == 2

    def test_unknown_figure(self, capsys):
        assert main(["reproduce", "fig9"]) == 4
        assert "fig9" in capsys.readouterr().err


class TestConfigErrors:
    def test_bad_value(self, isolated, capsys):
        conf = write_config(isolated, "model.E = -1.0\n")
        assert main(["predict", "--config", conf]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_key(self, isolated, capsys):
        conf = write_config(isolated, "model.gama = 1.0\n")
        assert main(["predict", "--config", conf]) == 2
        err = capsys.readouterr().err
        assert "run.conf:1" in err

    def test_missing_config_file(self, isolated, capsys):
        assert main(["predict", "--config", "absent.conf"]) == 2

    def test_bad_workers_env(self, isolated, monkeypatch, capsys):
        monkeypatch.setenv(WORKERS_ENV, "many")
        assert main(["predict"]) == 2
        assert WORKERS_ENV in capsys.readouterr().err

    def test_nonpositive_workers_flag(self, isolated, capsys):
        assert main(["predict", "--workers", "0"]) == 2


class TestWorkerResolution:
    def test_default_is_one(self):
        assert _resolve_workers(load_config(None)) == 1

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert _resolve_workers(load_config(None)) == 3

    def test_config_key_wins_over_env(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        cfg = load_config(None).replaced(run__workers=2)
        assert _resolve_workers(cfg) == 2


class TestPredictCommand:
    def test_writes_dataset_and_figure(self, isolated, capsys):
        assert main(["predict", "--out", "table.csv"]) == 0
        out = capsys.readouterr().out
        assert "wrote table.csv" in out
        assert "wrote table.png" in out
        assert (isolated / "table.csv").exists()
        assert (isolated / "table.png").stat().st_size > 0
        header = (isolated / "table.csv").read_text(encoding="utf-8").splitlines()[0]
        assert json.loads(header[2:])["kind"] == "predict"

    def test_default_output_stem(self, isolated):
        assert main(["predict"]) == 0
        assert (isolated / "predict.csv").exists()
        assert (isolated / "predict.png").exists()

    def test_json_format(self, isolated):
        assert main(["predict", "--out", "table.json", "--format", "json"]) == 0
        doc = json.loads((isolated / "table.json").read_text(encoding="utf-8"))
        assert doc["metadata"]["kind"] == "predict"
        assert "a_out" in doc["columns"]

    def test_nested_out_path(self, isolated):
        assert main(["predict", "--out", "runs/deep/table.csv"]) == 0
        assert (isolated / "runs" / "deep" / "table.csv").exists()

    def test_reruns_are_byte_identical(self, isolated, monkeypatch):
        first = isolated / "first"
        second = isolated / "second"
        for run_dir in (first, second):
            run_dir.mkdir()
            monkeypatch.chdir(run_dir)
            assert main(["predict", "--out", "table.csv"]) == 0
        a = (first / "table.csv").read_bytes()
        b = (second / "table.csv").read_bytes()
        assert a == b


class TestTrajectoryCommand:
    def test_run(self, isolated, capsys):
        conf = write_config(isolated, CHEAP_TRAJECTORY)
        assert main(["trajectory", "--config", conf, "--out", "shot.csv"]) == 0
        out = capsys.readouterr().out
        assert "outcome: extended" in out
        assert (isolated / "shot.csv").exists()
        assert (isolated / "shot.png").exists()


class TestSweepCommand:
    def test_both_directions(self, isolated, capsys):
        conf = write_config(isolated, CHEAP_SWEEP)
        assert main(["sweep", "--config", conf, "--out", "loop.csv"]) == 0
        out = capsys.readouterr().out
        assert (isolated / "loop_down.csv").exists()
        assert (isolated / "loop_up.csv").exists()
        assert (isolated / "loop.png").exists()
        assert out.count("switch_gamma: none") == 2

    def test_single_direction(self, isolated):
        conf = write_config(isolated, CHEAP_SWEEP + "sweep.directions = up\n")
        assert main(["sweep", "--config", conf, "--out", "loop.csv"]) == 0
        assert (isolated / "loop.csv").exists()
        assert (isolated / "loop.png").exists()
        assert not (isolated / "loop_up.csv").exists()


class TestReproduceCommand:
    def test_fig2_bundle(self, isolated):
        conf = write_config(isolated, CHEAP_FIG2)
        assert main(["reproduce", "fig2", "--config", conf,
                     "--out", "bundle"]) == 0
        bundle = isolated / "bundle"
        manifest = json.loads((bundle / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["figure"] == "fig2"
        assert len(manifest["files"]) == 18
        for name in manifest["files"]:
            assert (bundle / name).exists()
        csvs = sorted(p.name for p in bundle.glob("*.csv"))
        assert len(csvs) == 9
        assert "profile_gm0p5_s8p69755.csv" in csvs
        assert len(list(bundle.glob("*.png"))) == 9
        assert set(manifest["runtimes_s"]) >= {"build"}


class TestNumericalFailure:
    def test_partial_output_and_exit_3(self, isolated, monkeypatch, capsys):
        partial = Dataset(kind="predict", columns=["gamma"], rows=[(-0.5,)],
                          metadata={})

        def explode(cfg):
            err = NumericalError("continuation stalled")
            err.partial = partial
            raise err

        monkeypatch.setattr("skinflow.cli.build_predict", explode)
        assert main(["predict", "--out", "broken.csv"]) == 3
        err = capsys.readouterr().err
        assert "numerical failure" in err
        assert "partial output" in err
        assert (isolated / "broken.csv").exists()

    def test_failure_without_partial(self, isolated, monkeypatch, capsys):
        def explode(cfg):
            raise NumericalError("no cycle at these parameters")

        monkeypatch.setattr("skinflow.cli.build_predict", explode)
        assert main(["predict", "--out", "broken.csv"]) == 3
        assert not (isolated / "broken.csv").exists()


class TestInstalledEntryPoint:
    def test_console_script(self, isolated):
        proc = subprocess.run(
            ["skinflow", "--help"], capture_output=True, text=True, timeout=60)
        assert proc.returncode == 0
        assert "reproduce" in proc.stdout

    def test_exit_code_flows_through_shell(self, isolated):
        proc = subprocess.run(
            ["skinflow", "frobnicate"], capture_output=True, text=True, timeout=60)
        assert proc.returncode == 4
