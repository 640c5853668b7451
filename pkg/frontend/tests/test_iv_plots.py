import os
import shutil
import subprocess
import sys

import pytest

from memdrift_plots import SchemaError, plot_iv
from memdrift_plots.cli import main

from conftest import write_iv


class TestIvPlot:
    def test_three_periods_three_loops(self, iv_csv, tmp_path):
        result = plot_iv(str(iv_csv), str(tmp_path / "iv.png"))
        assert os.path.getsize(result.path) > 0
        assert result.n_loops == 3
        assert result.pinched

    def test_constant_voltage_degenerate(self, tmp_path):
        path = write_iv(tmp_path / "const.csv", constant=5.0)
        result = plot_iv(str(path), str(tmp_path / "c.png"))
        assert result.n_loops == 1  # one degenerate segment, no crossings
        assert not result.pinched
        assert os.path.getsize(result.path) > 0

    def test_unpinched_loop_no_marker(self, tmp_path):
        # shift the current so it no longer passes through the origin
        path = write_iv(tmp_path / "shifted.csv")
        lines = path.read_text().splitlines()
        header, rows = lines[0], lines[1:]
        cols = [r.split(",") for r in rows]
        shifted = [",".join(c[:3] + [str(float(c[3]) + 30.0),
                                     str((float(c[3]) + 30.0) * 400.0)])
                   for c in cols]
        path.write_text("\n".join([header] + shifted) + "\n")
        result = plot_iv(str(path), str(tmp_path / "s.png"))
        assert not result.pinched

    def test_missing_column(self, iv_csv, tmp_path):
        text = iv_csv.read_text().replace("current_Acm2", "amps")
        bad = tmp_path / "bad.csv"
        bad.write_text(text)
        with pytest.raises(SchemaError):
            plot_iv(str(bad), str(tmp_path / "b.png"))


class TestCli:
    def test_iv_subcommand(self, iv_csv, tmp_path, capsys):
        out = str(tmp_path / "cli_iv.png")
        assert main(["iv", str(iv_csv), "--out", out]) == 0
        assert os.path.exists(out)
        assert out in capsys.readouterr().out

    def test_limit_subcommand(self, limit_dir, tmp_path, capsys):
        assert main(["limit", str(limit_dir), "--out", str(tmp_path / "o")]) == 0
        captured = capsys.readouterr().out
        assert "limit_profiles.png" in captured
        assert "limit_convergence.png" in captured

    def test_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["iv", str(bad)]) == 1


@pytest.mark.skipif(shutil.which("memdrift") is None,
                    reason="simulator CLI not installed")
class TestAgainstSimulatorOutput:
    """End-to-end: drive the simulator CLI (its external interface) at small
    scale and plot its real CSV output."""

    def test_limit_study_end_to_end(self, tmp_path):
        cfg = tmp_path / "small.ini"
        cfg.write_text("[grid]\nN = 41\n\n[time]\nT_f = 0.004\nM = 4\n")
        sim_out = tmp_path / "sim"
        subprocess.run(["memdrift", "limit-study", "--config", str(cfg),
                        "--out", str(sim_out)], check=True,
                       capture_output=True, text=True)
        result = plot_limit_study_dir_checked(str(sim_out), str(tmp_path / "figs"))
        assert result.n_curves == 5  # four eps curves + reduced

    def test_iv_end_to_end(self, tmp_path):
        cfg = tmp_path / "small.ini"
        cfg.write_text("[grid]\nN = 41\n")
        sim_out = tmp_path / "sim_iv"
        subprocess.run(["memdrift", "iv-sweep", "--config", str(cfg),
                        "--out", str(sim_out), "--steps", "60"], check=True,
                       capture_output=True, text=True)
        result = plot_iv(os.path.join(str(sim_out), "iv.csv"),
                         str(tmp_path / "iv_real.png"))
        assert result.n_loops == 3
        assert result.pinched


def plot_limit_study_dir_checked(directory, out):
    from memdrift_plots import plot_limit_study_dir

    return plot_limit_study_dir(directory, out)
