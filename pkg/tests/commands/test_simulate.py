"""Tests for the simulate command."""

import json
from unittest.mock import patch

import pandas as pd
import pytest

from exboot import density
from exboot.commands.config import RunConfig
from exboot.commands.simulate import cmd_simulate, design_from_config, parse_list
from exboot.exceptions import InvalidInputError
from exboot.main import app
from exboot.simgen import CoverageReport, DesignSpec


def small_config(temp_dir, **simulate):
    values = {"family": "separable_k2", "base": "gaussian", "p": 2, "dims": "5,5", "reps": 3}
    values.update(simulate)
    return RunConfig().with_overrides(
        run={"out": str(temp_dir), "seed": 5}, bootstrap={"B": 100}, simulate=values
    )


class TestParseList:
    """Test parse_list."""

    def test_values(self):
        """Test comma-separated parsing with a trailing comma."""
        assert parse_list("0.9,0.95,", float, "levels") == (0.9, 0.95)
        assert parse_list("25,25", int, "dims") == (25, 25)

    def test_bad_value(self):
        """Test that non-numbers are refused."""
        with pytest.raises(InvalidInputError):
            parse_list("25,x", int, "dims")


class TestDesignFromConfig:
    """Test design_from_config."""

    def test_density_design_is_scalar(self, temp_dir):
        """Test that density designs ignore p."""
        spec = design_from_config(small_config(temp_dir, family="dyadic_density", base="logistic", dims="30"))
        assert spec.p == 1
        assert spec.dims == (30,)
        assert spec.seed == 5


class TestCmdSimulate:
    """Test cmd_simulate."""

    @patch("exboot.commands.simulate.console.print")
    def test_writes_coverage(self, mock_print, temp_dir):
        """Test coverage.csv rows and the JSON envelope."""
        written = cmd_simulate(small_config(temp_dir))

        assert [p.name for p in written] == ["coverage.csv", "coverage.json"]
        frame = pd.read_csv(temp_dir / "coverage.csv")
        assert list(frame.columns) == ["design", "p", "dims", "level", "mode", "coverage", "reps", "B"]
        assert len(frame) == 4
        payload = json.loads((temp_dir / "coverage.json").read_text())
        assert payload["command"] == "simulate"
        assert payload["engine"] == "separable"
        assert len(payload["result"]["cells"]) == 4
        assert mock_print.call_count >= 2

    @patch("exboot.commands.simulate.console.print")
    def test_single_mode(self, mock_print, temp_dir):
        """Test that a mode selection limits the cells."""
        cmd_simulate(small_config(temp_dir, family="dyadic", dims="8"), modes=("raw",))
        frame = pd.read_csv(temp_dir / "coverage.csv")
        assert frame["mode"].tolist() == ["raw", "raw"]

    @patch("exboot.commands.simulate.console.print")
    def test_density_settings_and_modes_recorded(self, mock_print, temp_dir):
        """Test that grid, undersmoothing and modes reach the run and its JSON."""
        config = small_config(temp_dir, family="dyadic_density", base="gaussian", dims="20", reps=2).with_overrides(
            density={"grid": "-0.5:0.5:5", "undersmooth": 0.25}
        )
        with patch("exboot.simgen.density.bandwidth", wraps=density.bandwidth) as mock_bandwidth:
            cmd_simulate(config, modes=("constant", "studentized"))

        assert mock_bandwidth.call_count == 2
        assert all(call.args[2] == 0.25 for call in mock_bandwidth.call_args_list)
        payload = json.loads((temp_dir / "coverage.json").read_text())
        assert payload["config"]["input_options"]["modes"] == ["constant", "studentized"]
        assert payload["result"]["modes"] == ["constant", "studentized"]
        assert payload["result"]["density"]["grid"] == [-0.5, 0.5, 5]
        assert payload["result"]["density"]["undersmooth"] == 0.25


class TestSimulateCommand:
    """Test the simulate command through the CLI."""

    def test_success(self, cli_runner, temp_dir):
        """Test a tiny run."""
        result = cli_runner.invoke(
            app,
            [
                "simulate", "--family", "separable_k3", "--base", "gaussian", "--p", "2",
                "--dims", "3,3,3", "--reps", "2", "--B", "100", "--levels", "0.9",
                "--mode", "raw", "--out", str(temp_dir),
            ],
        )
        assert result.exit_code == 0
        assert "Coverage" in result.stdout
        assert len(pd.read_csv(temp_dir / "coverage.csv")) == 1

    def test_wrong_dims(self, cli_runner, temp_dir):
        """Test exit code 2 when dims do not fit the family."""
        result = cli_runner.invoke(
            app, ["simulate", "--family", "separable_k2", "--dims", "10", "--out", str(temp_dir)]
        )
        assert result.exit_code == 2
        assert (temp_dir / "error.json").exists()

    @pytest.mark.parametrize("flag", ["--paper-scale", "--full-scale"])
    def test_paper_scale(self, cli_runner, temp_dir, flag):
        """Test that the scale switch asks for 2,500 replications of 2,500 draws."""
        spec = DesignSpec("separable_k2", p=2, dims=(5, 5))
        report = CoverageReport(
            design=spec, reps=2500, B=2500, levels=(0.9,), modes=("raw",), coverage={(0.9, "raw"): 0.9}
        )
        with patch("exboot.commands.simulate.simgen.coverage_experiment", return_value=report) as mock_run:
            result = cli_runner.invoke(
                app,
                ["simulate", flag, "--p", "2", "--dims", "5,5", "--levels", "0.9", "--mode", "raw", "--out", str(temp_dir)],
            )

        assert result.exit_code == 0
        assert mock_run.call_args.kwargs["reps"] == 2500
        assert mock_run.call_args.kwargs["B"] == 2500
        assert json.loads((temp_dir / "coverage.json").read_text())["config"]["simulate"]["paper_scale"] is True

    def test_same_json_for_any_thread_count(self, cli_runner, temp_dir):
        """Test byte-identical coverage.json for 1 and 8 workers."""
        for threads in ("1", "8"):
            result = cli_runner.invoke(
                app,
                [
                    "simulate", "--family", "dyadic", "--base", "mixture", "--p", "3", "--dims", "8",
                    "--reps", "4", "--B", "100", "--seed", "21", "--threads", threads,
                    "--out", str(temp_dir / threads),
                ],
            )
            assert result.exit_code == 0
        assert (temp_dir / "1" / "coverage.json").read_bytes() == (temp_dir / "8" / "coverage.json").read_bytes()
        assert (temp_dir / "1" / "coverage.csv").read_bytes() == (temp_dir / "8" / "coverage.csv").read_bytes()
