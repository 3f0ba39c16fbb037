"""Input validation utilities for exboot."""

import os
from pathlib import Path

import numpy as np

from exboot.exceptions import InvalidInputError

MIN_DRAWS = 100


def validate_level(value: float, field: str = "alpha") -> float:
    """Validate a probability level strictly inside (0, 1)."""
    try:
        level = float(value)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(field, value, "must be a number") from e
    if not 0.0 < level < 1.0:
        raise InvalidInputError(field, value, "must lie strictly between 0 and 1")
    return level


def validate_draws(value: int) -> int:
    """Validate the bootstrap draw count."""
    if isinstance(value, bool) or int(value) != value:
        raise InvalidInputError("B", value, "must be an integer")
    if value < MIN_DRAWS:
        raise InvalidInputError("B", value, f"must be at least {MIN_DRAWS}")
    return int(value)


def validate_seed(value: int) -> int:
    """Validate a master seed."""
    try:
        seed = int(value)
    except (TypeError, ValueError) as e:
        raise InvalidInputError("seed", value, "must be an integer") from e
    if seed < 0:
        raise InvalidInputError("seed", value, "must be non-negative")
    return seed


def validate_threads(value: int) -> int:
    """Validate a worker cap."""
    if int(value) < 1:
        raise InvalidInputError("threads", value, "must be at least 1")
    return int(value)


def validate_slack(value: float) -> float:
    """Validate the penalty slack constant c."""
    if float(value) <= 1.0:
        raise InvalidInputError("c", value, "must exceed 1")
    return float(value)


def validate_mode(value: str, choices: tuple[str, ...]) -> str:
    """Validate an enumerated option."""
    cleaned = str(value).strip().lower()
    if cleaned not in choices:
        raise InvalidInputError("mode", value, f"must be one of {', '.join(choices)}")
    return cleaned


def parse_grid(spec: str) -> np.ndarray:
    """Parse 'lo:hi:count' into an evenly spaced grid."""
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise InvalidInputError("grid", spec, "expected lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise InvalidInputError("grid", spec, "bounds must be numbers, count an integer") from e
    if count < 1 or hi < lo or (count > 1 and hi == lo):
        raise InvalidInputError("grid", spec, "need lo < hi and a positive count")
    return np.linspace(lo, hi, count)


def validate_grid(grid: np.ndarray, allow_zero: bool = False) -> np.ndarray:
    """Reject empty grids and, unless allowed, zero design points."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidInputError("grid", "[]", "needs at least one design point")
    if not np.all(np.isfinite(grid)):
        raise InvalidInputError("grid", grid.tolist(), "design points must be finite")
    if not allow_zero and np.any(grid == 0.0):
        raise InvalidInputError(
            "grid", "0.0", "zero is the point-mass location, not a design point"
        )
    return grid


def validate_input_path(path: str | Path) -> Path:
    """Check that an input file exists and is readable."""
    path_obj = Path(path)
    if not path_obj.is_file():
        raise InvalidInputError("input", str(path), "file does not exist")
    if not os.access(path_obj, os.R_OK):
        raise InvalidInputError("input", str(path), "file is not readable")
    return path_obj


def validate_output_dir(path: str | Path) -> Path:
    """Create the output directory if needed and check it is writable."""
    path_obj = Path(path)
    try:
        path_obj.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InvalidInputError("output directory", str(path), str(e)) from e
    if not os.access(path_obj, os.W_OK):
        raise InvalidInputError("output directory", str(path), "not writable")
    return path_obj
