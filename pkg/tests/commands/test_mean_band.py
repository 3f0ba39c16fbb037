"""Tests for the mean-band command."""

import json

import numpy as np
import pandas as pd
import pytest

from exboot.commands.common import has_diagonal_rows
from exboot.commands.config import RunConfig
from exboot.commands.mean_band import cmd_mean_band, resolve_engine
from exboot.exceptions import DegenerateScaleError, InvalidInputError
from exboot.main import app


def constant_column_csv(temp_dir):
    lines = [f"{i},{j},{i * 0.3 + j * 0.1 + (i * j) % 3},5.0" for i in range(1, 5) for j in range(1, 4)]
    path = temp_dir / "constant.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestResolveEngine:
    """Test resolve_engine."""

    def test_explicit_engine_wins(self):
        """Test that a named engine is used as given."""
        assert resolve_engine("joint", 2, 5) == "joint"

    def test_auto(self):
        """Test the auto rules for K and column count."""
        assert resolve_engine("auto", 2, 3) == "separable"
        assert resolve_engine("auto", None, 3) == "joint"
        assert resolve_engine("auto", None, 5) == "separable"

    def test_auto_three_columns_with_repeated_unit(self):
        """Test that a three-column file holding cell (1, 1) is read as multiway."""
        assert resolve_engine("auto", None, 3, diagonal=True) == "separable"
        assert resolve_engine("joint", None, 3, diagonal=True) == "joint"


class TestHasDiagonalRows:
    """Test has_diagonal_rows."""

    def test_multiway_grid(self, temp_dir):
        """Test that a complete two-way grid repeats a unit."""
        path = temp_dir / "grid.csv"
        path.write_text("i,j,y\n1,1,0.5\n1,2,0.1\n2,1,0.3\n2,2,0.7\n", encoding="utf-8")
        assert has_diagonal_rows(path)

    def test_edge_list(self, edge_csv):
        """Test that an edge list never repeats a unit."""
        assert not has_diagonal_rows(edge_csv)

    def test_unknown_engine(self):
        """Test that unknown engines are refused."""
        with pytest.raises(InvalidInputError):
            resolve_engine("triadic", None, 3)


class TestCmdMeanBand:
    """Test cmd_mean_band."""

    def test_writes_band_and_report(self, multiway_csv, temp_dir, small_multiway):
        """Test a multiway run with K given."""
        config = RunConfig(input=str(multiway_csv)).with_overrides(
            run={"out": str(temp_dir / "out"), "seed": 3}, bootstrap={"B": 200}
        )
        written = cmd_mean_band(config, K=2)

        assert [path.name for path in written] == ["band.csv", "report.json"]
        band = pd.read_csv(temp_dir / "out" / "band.csv")
        assert len(band) == 3
        assert np.allclose(band["estimate"], small_multiway.flat().mean(axis=0))
        assert np.all(band["lower"] <= band["estimate"])

        report = json.loads((temp_dir / "out" / "report.json").read_text())
        assert report["command"] == "mean-band"
        assert report["engine"] == "separable"
        assert report["seed"] == 3
        assert report["result"]["B"] == 200
        assert "draws" not in report["result"]

    def test_draws_embedded(self, multiway_csv, temp_dir):
        """Test that draws are included on request."""
        config = RunConfig(input=str(multiway_csv)).with_overrides(
            run={"out": str(temp_dir)}, bootstrap={"B": 100}, output={"draws": True, "csv": False}
        )
        written = cmd_mean_band(config, K=2)
        assert [path.name for path in written] == ["report.json"]
        report = json.loads((temp_dir / "report.json").read_text())
        assert np.asarray(report["result"]["draws"]).shape == (100, 3)

    def test_p_inferred_from_columns(self, multiway_csv, temp_dir):
        """Test that p defaults to the columns after the indices."""
        config = RunConfig(input=str(multiway_csv)).with_overrides(
            run={"out": str(temp_dir)}, bootstrap={"B": 100, "engine": "separable"}
        )
        cmd_mean_band(config)
        report = json.loads((temp_dir / "report.json").read_text())
        assert report["config"]["input_options"] == {"engine": "separable", "K": 2, "p": 3, "symmetrize": False}

    def test_edge_list_auto_joint(self, edge_csv, temp_dir):
        """Test that a three-column edge list goes to the joint engine."""
        config = RunConfig(input=str(edge_csv)).with_overrides(
            run={"out": str(temp_dir)}, bootstrap={"B": 100}
        )
        cmd_mean_band(config)
        report = json.loads((temp_dir / "report.json").read_text())
        assert report["engine"] == "joint"
        assert report["result"]["n"] == 12

    def test_constant_column_studentized(self, temp_dir):
        """Test that a constant coordinate cannot be studentized."""
        config = RunConfig(input=str(constant_column_csv(temp_dir))).with_overrides(
            run={"out": str(temp_dir)}, bootstrap={"B": 100}
        )
        with pytest.raises(DegenerateScaleError):
            cmd_mean_band(config, K=2)

    def test_constant_column_raw(self, temp_dir):
        """Test that raw mode handles a constant coordinate."""
        config = RunConfig(input=str(constant_column_csv(temp_dir))).with_overrides(
            run={"out": str(temp_dir)}, bootstrap={"B": 100, "mode": "raw"}
        )
        cmd_mean_band(config, K=2)
        band = pd.read_csv(temp_dir / "band.csv")
        assert band["estimate"].iloc[1] == 5.0

    def test_missing_input(self, temp_dir):
        """Test that a missing file is an input error."""
        config = RunConfig(input=str(temp_dir / "nope.csv")).with_overrides(run={"out": str(temp_dir)})
        with pytest.raises(InvalidInputError):
            cmd_mean_band(config)


class TestMeanBandCommand:
    """Test the mean-band command through the CLI."""

    def test_success(self, cli_runner, multiway_csv, temp_dir):
        """Test a successful run and its messages."""
        out = temp_dir / "out"
        result = cli_runner.invoke(
            app, ["mean-band", str(multiway_csv), "--K", "2", "--B", "100", "--out", str(out)]
        )
        assert result.exit_code == 0
        assert "Wrote" in result.stdout
        assert (out / "band.csv").exists()
        assert (out / "report.json").exists()

    def test_threads_do_not_change_report(self, cli_runner, multiway_csv, temp_dir):
        """Test byte-identical reports for one and eight workers."""
        args = ["mean-band", str(multiway_csv), "--K", "2", "--B", "600", "--seed", "9"]
        one = cli_runner.invoke(app, args + ["--threads", "1", "--out", str(temp_dir / "a")])
        eight = cli_runner.invoke(app, args + ["--threads", "8", "--out", str(temp_dir / "b")])
        assert one.exit_code == 0 and eight.exit_code == 0
        assert (temp_dir / "a" / "report.json").read_bytes() == (temp_dir / "b" / "report.json").read_bytes()
        assert (temp_dir / "a" / "band.csv").read_bytes() == (temp_dir / "b" / "band.csv").read_bytes()

    def test_malformed_file(self, cli_runner, temp_dir):
        """Test exit code 2 and error.json for a bad row."""
        path = temp_dir / "bad.csv"
        path.write_text("1,1,0.5\n1,2,abc\n2,1,0.1\n2,2,0.3\n", encoding="utf-8")
        result = cli_runner.invoke(app, ["mean-band", str(path), "--K", "2", "--out", str(temp_dir / "out")])

        assert result.exit_code == 2
        assert "Error:" in result.stdout
        error = json.loads((temp_dir / "out" / "error.json").read_text())
        assert error["error"] == "MalformedRowError"
        assert error["exit_code"] == 2

    def test_cli_three_column_multiway_without_k(self, cli_runner, temp_dir):
        """Test that a K=2, p=1 grid is bootstrapped as multiway when --K is omitted."""
        rng = np.random.default_rng(8)
        lines = [f"{i},{j},{rng.standard_normal():.17g}" for i in range(1, 6) for j in range(1, 6)]
        path = temp_dir / "grid.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        out = temp_dir / "out"
        result = cli_runner.invoke(app, ["mean-band", str(path), "--B", "200", "--mode", "raw", "--out", str(out)])

        assert result.exit_code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["engine"] == "separable"
        assert report["config"]["input_options"]["K"] == 2
        assert report["config"]["input_options"]["p"] == 1

    def test_degenerate_scale(self, cli_runner, temp_dir):
        """Test exit code 3 for a constant coordinate in studentized mode."""
        path = constant_column_csv(temp_dir)
        result = cli_runner.invoke(
            app, ["mean-band", str(path), "--K", "2", "--B", "100", "--out", str(temp_dir / "out")]
        )
        assert result.exit_code == 3
        assert json.loads((temp_dir / "out" / "error.json").read_text())["error"] == "DegenerateScaleError"

    def test_invalid_alpha(self, cli_runner, multiway_csv, temp_dir):
        """Test that alpha outside (0, 1) exits with code 2."""
        result = cli_runner.invoke(
            app, ["mean-band", str(multiway_csv), "--alpha", "1.5", "--out", str(temp_dir)]
        )
        assert result.exit_code == 2
