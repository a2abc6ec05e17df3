"""Command-line interface: subcommands and exit codes (in-process)."""

import numpy as np
import pytest

from gemsim.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from gemsim.pgmio import read_pgm

CONFIG_TEXT = """
scenario = tem00_decay
grid.n = 128
grid.extent_mm = 15.36
storage.times_us = 0,30
pipeline.storage_steps = 8
output_dir = {out}
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT.format(out=tmp_path / "out"))
    return path


class TestSimulate:
    def test_runs_and_writes_outputs(self, config_path, tmp_path, capsys):
        assert main(["simulate", str(config_path)]) == EXIT_OK
        assert (tmp_path / "out" / "tem00_decay.csv").exists()
        assert "tem00_decay" in capsys.readouterr().out

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("scenario = tem00_decay\nmemory.bogus = 1\n")
        assert main(["simulate", str(path)]) == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.cfg"
        assert main(["simulate", str(missing)]) == EXIT_CONFIG


class TestSweep:
    def test_sweep_runs(self, config_path, tmp_path, capsys):
        code = main(["sweep", str(config_path),
                     "--param", "memory.D_cm2_s", "--values", "13.2,26.4"])
        assert code == EXIT_OK
        assert (tmp_path / "out" / "sweep_memory_D_cm2_s.csv").exists()

    def test_boolean_values(self, config_path, tmp_path):
        code = main(["sweep", str(config_path),
                     "--param", "storage.control_on", "--values", "false,true"])
        assert code == EXIT_OK

    def test_unknown_param_exit_code(self, config_path, capsys):
        code = main(["sweep", str(config_path),
                     "--param", "memory.bogus", "--values", "1"])
        assert code == EXIT_CONFIG

    def test_unparseable_value_exit_code(self, config_path, capsys):
        code = main(["sweep", str(config_path),
                     "--param", "memory.D_cm2_s", "--values", "abc"])
        assert code == EXIT_CONFIG


class TestModes:
    def test_renders_pgm(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "tem20.pgm"
        code = main(["modes", "--render", "2,0", "--waist", "1.5",
                     "--grid-n", "64", "--out", str(out)])
        assert code == EXIT_OK
        img = read_pgm(out)
        assert img.shape == (64, 64)
        assert img.max() == 1.0   # per-image normalization

    def test_bad_mode_spec(self, capsys):
        assert main(["modes", "--render", "2", "--waist", "1.5"]) == EXIT_CONFIG
        assert main(["modes", "--render", "99,0", "--waist", "1.5"]) == EXIT_CONFIG


class TestFit:
    def test_exponential_fit(self, tmp_path, capsys):
        t = np.linspace(0, 60e-6, 11)
        eff = 0.8 * np.exp(-t / 20e-6)
        path = tmp_path / "decay.csv"
        path.write_text("t_s,eff\n" +
                        "\n".join(f"{a},{b}" for a, b in zip(t, eff)))
        assert main(["fit", "--csv", str(path), "--model", "exp"]) == EXIT_OK
        out = capsys.readouterr().out
        tau = float([l for l in out.splitlines() if l.startswith("tau")][0]
                    .split("=")[1])
        assert tau == pytest.approx(20e-6, rel=1e-9)

    def test_linear_fit(self, tmp_path, capsys):
        t = np.linspace(0, 60e-6, 11)
        s2 = 5.6e-7 + 13.2e-4 * t
        path = tmp_path / "expand.csv"
        path.write_text("# comment\nt_s,sigma2\n" +
                        "\n".join(f"{a},{b}" for a, b in zip(t, s2)))
        assert main(["fit", "--csv", str(path), "--model", "linear"]) == EXIT_OK
        out = capsys.readouterr().out
        slope = float([l for l in out.splitlines() if l.startswith("slope")][0]
                      .split("=")[1])
        assert slope == pytest.approx(13.2e-4, rel=1e-9)

    def test_missing_csv_exit_code(self, tmp_path, capsys):
        code = main(["fit", "--csv", str(tmp_path / "nope.csv"),
                     "--model", "exp"])
        assert code == EXIT_IO

    def test_too_few_rows_exit_code(self, tmp_path, capsys):
        path = tmp_path / "short.csv"
        path.write_text("t,v\n1,2\n")
        assert main(["fit", "--csv", str(path), "--model", "exp"]) == EXIT_CONFIG


class TestEstimateD:
    def test_kinetic_estimate(self, capsys):
        code = main(["estimate-d", "--temp-K", "343",
                     "--buffer-torr", "0.5", "--rate-MHz-per-torr", "17"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        cm2s = float(out.split("=")[-1].split("cm^2/s")[0])
        assert cm2s == pytest.approx(32.8, abs=0.3)
