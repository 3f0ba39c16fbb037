"""In-memory exchangeable arrays and their CSV formats.

File formats are 1-based and the parser is the only place that converts to the
0-based positions used everywhere else.
"""

import io
import logging
import math
from collections.abc import Hashable
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
import pandas as pd

from exboot.exceptions import (
    AsymmetricDataError,
    DuplicateIndexError,
    InvalidInputError,
    MalformedRowError,
    MissingCellError,
    SelfLoopError,
    UnparseableWeightError,
)

logger = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MultiwayArray:
    """K-way array of p-vectors, ``values`` has shape ``dims + (p,)``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim < 2:
            raise InvalidInputError(
                "values", values.shape, "need at least one index axis and a value axis"
            )
        if 0 in values.shape:
            raise InvalidInputError("values", values.shape, "empty axis")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def scalar(cls, values: np.ndarray) -> "MultiwayArray":
        """Wrap an array of scalars (p = 1)."""
        return cls(np.asarray(values, dtype=float)[..., None])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.values.shape[:-1])

    @property
    def K(self) -> int:
        return self.values.ndim - 1

    @property
    def p(self) -> int:
        return self.values.shape[-1]

    @property
    def n(self) -> int:
        """Smallest cluster count, the effective sample size."""
        return min(self.dims)

    @property
    def n_bar(self) -> int:
        return max(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def flat(self) -> np.ndarray:
        """Cells in C order as a ``(size, p)`` matrix."""
        return self.values.reshape(self.size, self.p)


@dataclass(frozen=True, eq=False)
class DyadicArray:
    """Array over ordered pairs of distinct units, stored as ``(n, n, p)``.

    The diagonal carries no observation and is held at zero.
    """

    values: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 2:
            values = values[..., None]
        if values.ndim != 3 or values.shape[0] != values.shape[1]:
            raise InvalidInputError("values", values.shape, "expected an (n, n, p) array")
        diag = np.arange(values.shape[0])
        values[diag, diag, :] = 0.0
        if self.symmetric and not np.array_equal(values, values.transpose(1, 0, 2)):
            raise AsymmetricDataError()
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[-1]

    @property
    def K(self) -> int:
        return 2

    def upper_pairs(self) -> np.ndarray:
        """Values of unordered pairs i < j as an ``(n(n-1)/2, p)`` matrix."""
        rows, cols = np.triu_indices(self.n, k=1)
        return self.values[rows, cols, :]


@dataclass(frozen=True, eq=False)
class PolyadicArray:
    """Jointly indexed array of arity K, ``values`` shaped ``(n,)*K + (p,)``.

    Only tuples of pairwise distinct indices are observations.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        shape = values.shape[:-1]
        if len(shape) < 2 or len(set(shape)) != 1:
            raise InvalidInputError(
                "values", values.shape, "expected (n,)*K + (p,) with K >= 2"
            )
        object.__setattr__(self, "values", _frozen(values * self.distinct_mask(shape)[..., None]))

    @staticmethod
    def distinct_mask(shape: tuple[int, ...]) -> np.ndarray:
        grids = np.indices(shape)
        mask = np.ones(shape, dtype=bool)
        for a in range(len(shape)):
            for b in range(a + 1, len(shape)):
                mask &= grids[a] != grids[b]
        return mask

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[-1]

    @property
    def K(self) -> int:
        return self.values.ndim - 1


@dataclass(frozen=True)
class EdgeList:
    """Parsed edge rows together with the unit relabeling."""

    sources: tuple[Hashable, ...]
    targets: tuple[Hashable, ...]
    weights: np.ndarray = field(compare=False)
    ids: tuple[Hashable, ...] = ()

    def relabel(self) -> dict[Hashable, int]:
        """Map each id to its 1-based unit label."""
        return {unit: position + 1 for position, unit in enumerate(self.ids)}

    def inverse(self) -> dict[int, Hashable]:
        return {position + 1: unit for position, unit in enumerate(self.ids)}


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_table(stream: TextIO, header_token: int) -> tuple[pd.DataFrame, int]:
    """Read a CSV as strings; returns the frame and the line offset of row 0."""
    text = stream.read()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise MalformedRowError(1, "input is empty")
    tokens = [token.strip() for token in lines[0].split(",")]
    first = tokens[header_token] if len(tokens) > header_token else tokens[0]
    has_header = not _is_number(first)
    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(lines)),
            header=0 if has_header else None,
            dtype=str,
            skipinitialspace=True,
            keep_default_na=False,
            na_values=[],
        )
    except pd.errors.ParserError as e:
        raise MalformedRowError(0, f"ragged row ({e})") from e
    offset = 2 if has_header else 1
    ragged = frame.isna().any(axis=1).to_numpy()
    if ragged.any():
        raise MalformedRowError(int(np.argmax(ragged)) + offset, "ragged row")
    return frame.apply(lambda column: column.str.strip()), offset


def _parse_float(token: str) -> float:
    """Correctly rounded ``float`` of a token; NaN when it is not a finite number."""
    try:
        value = float(token)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def _parse_frame(frame: pd.DataFrame) -> np.ndarray:
    return frame.apply(lambda column: column.map(_parse_float)).to_numpy(dtype=float)


def _to_numeric(frame: pd.DataFrame, offset: int) -> np.ndarray:
    numeric = _parse_frame(frame)
    bad = np.isnan(numeric)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise MalformedRowError(
            int(row) + offset, f"non-numeric value '{frame.iat[row, col]}'"
        )
    return numeric


def load_multiway_csv(stream: TextIO, K: int, p: int) -> MultiwayArray:
    """Parse rows ``i_1,...,i_K,x^1,...,x^p`` into a dense array."""
    if K < 1 or p < 1:
        raise InvalidInputError("K/p", (K, p), "both must be at least 1")
    frame, offset = _read_table(stream, header_token=0)
    if frame.shape[1] != K + p:
        raise MalformedRowError(
            offset, f"expected {K + p} columns (K={K}, p={p}), found {frame.shape[1]}"
        )
    table = _to_numeric(frame, offset)
    index_part = table[:, :K]
    if np.any(index_part != np.round(index_part)) or np.any(index_part < 1):
        row = int(np.argmax(np.any((index_part != np.round(index_part)) | (index_part < 1), axis=1)))
        raise MalformedRowError(row + offset, "indices must be positive integers")
    positions = index_part.astype(np.int64) - 1
    dims = tuple(int(d) for d in positions.max(axis=0) + 1)
    linear = np.ravel_multi_index(tuple(positions.T), dims)
    unique, first, counts = np.unique(linear, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = unique[np.argmax(counts > 1)]
        raise DuplicateIndexError(tuple(int(i) + 1 for i in np.unravel_index(dup, dims)))
    if unique.size != int(np.prod(dims)):
        raise MissingCellError(dims, int(unique.size))
    values = np.empty((int(np.prod(dims)), p))
    values[linear] = table[:, K:]
    logger.debug("Loaded multiway array with dims %s and p=%d", dims, p)
    return MultiwayArray(values.reshape(dims + (p,)))


def write_multiway_csv(array: MultiwayArray, stream: TextIO, header: bool = False) -> None:
    """Write an array in the format read by :func:`load_multiway_csv`."""
    index = np.indices(array.dims).reshape(array.K, -1).T + 1
    columns = [f"i{k + 1}" for k in range(array.K)] + [f"x{j + 1}" for j in range(array.p)]
    frame = pd.DataFrame(index, columns=columns[: array.K])
    for j in range(array.p):
        frame[columns[array.K + j]] = array.flat()[:, j]
    frame.to_csv(stream, index=False, header=header, float_format="%.17g", lineterminator="\n")


def load_dyadic_edges(stream: TextIO, symmetrize: bool = False) -> tuple[DyadicArray, EdgeList]:
    """Parse ``id_i,id_j,y`` rows into a zero-filled dyadic array.

    With ``symmetrize`` both ordered slots of a pair hold ``y_ij + y_ji``.
    Without it the array is marked symmetric when both directions already agree.
    """
    frame, offset = _read_table(stream, header_token=2)
    if frame.shape[1] < 3:
        raise MalformedRowError(offset, f"edge rows need 3 columns, found {frame.shape[1]}")
    sources = tuple(str(v).strip() for v in frame.iloc[:, 0])
    targets = tuple(str(v).strip() for v in frame.iloc[:, 1])
    weight_frame = frame.iloc[:, 2:]
    weights = _parse_frame(weight_frame)
    bad = np.isnan(weights)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise UnparseableWeightError(weight_frame.iat[row, col], int(row) + offset)
    for row, (a, b) in enumerate(zip(sources, targets, strict=True)):
        if a == b:
            raise SelfLoopError(a, row + offset)

    ids = tuple(str(unit) for unit in pd.unique(np.column_stack([sources, targets]).ravel()))
    labels = {unit: position for position, unit in enumerate(ids)}
    n, p = len(ids), weights.shape[1]
    values = np.zeros((n, n, p))
    seen: set[tuple[int, int]] = set()
    for row, (a, b) in enumerate(zip(sources, targets, strict=True)):
        i, j = labels[a], labels[b]
        if (i, j) in seen:
            raise DuplicateIndexError((a, b))
        seen.add((i, j))
        values[i, j] = weights[row]
    if symmetrize:
        values = values + values.transpose(1, 0, 2)
    edges = EdgeList(sources=sources, targets=targets, weights=weights, ids=ids)
    logger.debug("Loaded %d edges over %d units", len(sources), n)
    symmetric = symmetrize or bool(np.array_equal(values, values.transpose(1, 0, 2)))
    return DyadicArray(values, symmetric=symmetric), edges
