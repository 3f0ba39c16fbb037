"""Tests for the config command and run configuration loading."""

from unittest.mock import patch

import click
import pytest

from exboot.commands.config import (
    FALLBACK_SEED,
    RunConfig,
    create_config,
    default_seed,
    load_run_config,
    manage_config,
    read_config_file,
    show_config,
    validate_config,
    write_config_file,
)
from exboot.exceptions import ConfigurationError
from exboot.main import app


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv("EXBOOT_SEED", raising=False)


class TestDefaultSeed:
    """Test default_seed."""

    def test_fallback(self):
        """Test the fixed seed when EXBOOT_SEED is unset."""
        assert default_seed() == FALLBACK_SEED

    def test_environment(self, monkeypatch):
        """Test that EXBOOT_SEED feeds the default seed."""
        monkeypatch.setenv("EXBOOT_SEED", "77")
        assert default_seed() == 77
        assert RunConfig().run.seed == 77

    def test_not_an_integer(self, monkeypatch):
        """Test that a non-integer EXBOOT_SEED is a configuration error."""
        monkeypatch.setenv("EXBOOT_SEED", "abc")
        with pytest.raises(ConfigurationError):
            default_seed()


class TestRunConfig:
    """Test RunConfig."""

    def test_overrides_skip_none(self):
        """Test that None leaves a value alone."""
        config = RunConfig().with_overrides(bootstrap={"B": 900, "alpha": None}, lasso={"c": None})
        assert config.bootstrap.B == 900
        assert config.bootstrap.alpha == 0.1
        assert config.lasso.c == 1.1

    def test_reproducible_dict(self):
        """Test that threads and out are left out of the recorded settings."""
        data = RunConfig().with_overrides(run={"threads": 8, "out": "elsewhere"}).reproducible_dict()
        assert "threads" not in data["run"]
        assert "out" not in data["run"]
        assert data["run"]["seed"] == FALLBACK_SEED
        assert RunConfig().to_dict()["run"]["threads"] == 1

    def test_sections(self):
        """Test the section names in file order."""
        assert list(RunConfig().sections()) == ["run", "bootstrap", "density", "lasso", "simulate", "output"]


class TestConfigFiles:
    """Test reading and writing exboot.toml."""

    def test_round_trip(self, tmp_path):
        """Test that a written default file reads back as the defaults."""
        path = write_config_file(tmp_path / "exboot.toml")
        assert read_config_file(path) == RunConfig()

    def test_partial_file(self, tmp_path):
        """Test that unnamed keys keep their defaults and ints widen to floats."""
        path = tmp_path / "exboot.toml"
        path.write_text("[bootstrap]\nB = 1000\nalpha = 1\n\n[density]\nrule = \"b\"\n")
        config = read_config_file(path)
        assert config.bootstrap.B == 1000
        assert config.bootstrap.alpha == 1.0
        assert isinstance(config.bootstrap.alpha, float)
        assert config.density.rule == "b"
        assert config.density.kernel == "epanechnikov"

    @pytest.mark.parametrize(
        "content",
        [
            "[bootstrap]\nbees = 3\n",
            "[plotting]\ncolor = \"red\"\n",
            "[bootstrap]\nB = \"many\"\n",
            "[bootstrap]\nB = 1.5\n",
            "[output]\ncsv = 1\n",
            "bootstrap = 3\n",
            "[bootstrap\n",
        ],
    )
    def test_invalid_files(self, tmp_path, content):
        """Test unknown keys and sections, wrong types and bad TOML."""
        path = tmp_path / "exboot.toml"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            read_config_file(path)

    def test_working_directory_file(self, tmp_path, monkeypatch):
        """Test that ./exboot.toml is picked up without --config."""
        (tmp_path / "exboot.toml").write_text("[run]\nseed = 42\n")
        monkeypatch.chdir(tmp_path)
        config = load_run_config(None, "mean-band", "data.csv")
        assert config.run.seed == 42
        assert config.command == "mean-band"
        assert config.input == "data.csv"


class TestConfigCommand:
    """Test the show, create and validate actions."""

    @patch("exboot.commands.config.console.print")
    def test_show_defaults(self, mock_print, tmp_path):
        """Test showing defaults when no file exists."""
        show_config(tmp_path / "exboot.toml")
        calls = [str(call.args[0]) for call in mock_print.call_args_list]
        assert any("showing defaults" in call for call in calls)

    @patch("exboot.commands.config.console.print")
    def test_show_invalid_file(self, mock_print, tmp_path):
        """Test that showing a broken file exits with code 2."""
        path = tmp_path / "exboot.toml"
        path.write_text("[bootstrap]\nbees = 3\n")
        with pytest.raises(click.exceptions.Exit) as exc_info:
            show_config(path)
        assert exc_info.value.exit_code == 2

    @patch("exboot.commands.config.console.print")
    def test_create(self, mock_print, tmp_path):
        """Test creating a file and refusing to overwrite it."""
        path = tmp_path / "exboot.toml"
        create_config(path)
        assert path.exists()
        before = path.read_text()

        create_config(path)
        assert path.read_text() == before
        calls = [str(call.args[0]) for call in mock_print.call_args_list]
        assert any("already exists" in call for call in calls)

    @patch("exboot.commands.config.console.print")
    def test_validate_missing(self, mock_print, tmp_path):
        """Test that validating a missing file exits with code 2."""
        with pytest.raises(click.exceptions.Exit) as exc_info:
            validate_config(tmp_path / "exboot.toml")
        assert exc_info.value.exit_code == 2

    @patch("exboot.commands.config.console.print")
    def test_validate_ok(self, mock_print, tmp_path):
        """Test that a created file validates."""
        path = write_config_file(tmp_path / "exboot.toml")
        validate_config(path)
        calls = [str(call.args[0]) for call in mock_print.call_args_list]
        assert any("valid" in call for call in calls)

    @patch("exboot.commands.config.console.print")
    def test_unknown_action(self, mock_print, tmp_path):
        """Test that unknown actions exit with code 2."""
        with pytest.raises(click.exceptions.Exit) as exc_info:
            manage_config("delete", str(tmp_path / "exboot.toml"))
        assert exc_info.value.exit_code == 2

    def test_cli_create_then_show(self, cli_runner, tmp_path):
        """Test the config command through the CLI."""
        path = tmp_path / "exboot.toml"
        created = cli_runner.invoke(app, ["config", "create", "--path", str(path)])
        shown = cli_runner.invoke(app, ["config", "show", "--path", str(path)])
        assert created.exit_code == 0
        assert shown.exit_code == 0
        assert "[bootstrap]" in shown.stdout
