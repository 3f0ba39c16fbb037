"""Pytest configuration and fixtures for exboot tests."""

import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from exboot.arrays import DyadicArray, MultiwayArray


@pytest.fixture
def cli_runner() -> CliRunner:
    """Provide a CLI runner for testing Typer commands."""
    return CliRunner()


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Provide a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for building test data."""
    return np.random.default_rng(12345)


@pytest.fixture
def small_multiway(rng) -> MultiwayArray:
    """A 6 x 5 array of 3-vectors with clustered structure."""
    rows = rng.standard_normal((6, 1, 3))
    cols = rng.standard_normal((1, 5, 3))
    cells = rng.standard_normal((6, 5, 3))
    return MultiwayArray(rows + cols + 0.5 * cells)


@pytest.fixture
def small_dyadic(rng) -> DyadicArray:
    """A symmetric dyadic array over 8 units with p = 2."""
    units = rng.standard_normal((8, 2))
    pairs = rng.standard_normal((8, 8, 2))
    pairs = 0.5 * (pairs + pairs.transpose(1, 0, 2))
    return DyadicArray(units[:, None] + units[None, :] + pairs, symmetric=True)


@pytest.fixture
def multiway_csv(temp_dir, small_multiway) -> Path:
    """The small multiway array written as i1,i2,x1,x2,x3 rows."""
    from exboot.arrays import write_multiway_csv

    path = temp_dir / "cells.csv"
    with open(path, "w", encoding="utf-8") as f:
        write_multiway_csv(small_multiway, f)
    return path


@pytest.fixture
def edge_csv(temp_dir, rng) -> Path:
    """Directed positive flows over 12 units, some pairs absent."""
    lines = ["exporter,importer,flow"]
    for i in range(12):
        for j in range(12):
            if i != j and rng.random() < 0.7:
                lines.append(f"u{i},u{j},{rng.lognormal():.6f}")
    path = temp_dir / "edges.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
