"""Logging configuration loaded from the packaged logging.yml."""

import logging
import logging.config
from importlib import resources
from pathlib import Path

import yaml
from rich.console import Console
from rich.logging import RichHandler

LEVELS = {"quiet": logging.ERROR, "default": logging.WARNING, "verbose": logging.DEBUG}


def stderr_rich_handler() -> RichHandler:
    """Rich console handler on stderr, keeping stdout for results."""
    return RichHandler(console=Console(stderr=True), show_path=False)


def load_logging_config() -> dict:
    """Packaged logging.yml as a dict."""
    text = resources.files("exboot").joinpath("logging.yml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def setup_logging(verbosity: str = "default", log_file: Path | None = None) -> dict:
    """Apply logging.yml with the requested console level and optional JSON log file."""
    config = load_logging_config()
    level = logging.getLevelName(LEVELS[verbosity])
    config["handlers"]["console"]["level"] = level
    config["loggers"]["exboot"]["level"] = level
    if log_file is not None:
        config["handlers"]["file"] = {
            "class": "logging.FileHandler",
            "level": "DEBUG",
            "formatter": "json",
            "filename": str(log_file),
            "encoding": "utf-8",
        }
        config["loggers"]["exboot"]["handlers"].append("file")
        config["loggers"]["exboot"]["level"] = "DEBUG"
    logging.config.dictConfig(config)
    return config
