"""Gaussian multiplier draws, sup-norm statistics and uniform bands.

Both array engines and the density bands reduce to the same computation: a
matrix ``design`` whose rows are weighted, centered projection estimates, and
draws ``xi @ design`` with standard normal ``xi``.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from exboot.exceptions import DegenerateScaleError, ModeMismatchError
from exboot.rng import CounterStreams
from exboot.validation import validate_level

logger = logging.getLogger(__name__)

MODES = ("raw", "studentized")
DRAW_BLOCK = 256


def _draw_block(streams: CounterStreams, stream: int, start: int, stop: int, design: np.ndarray) -> np.ndarray:
    xi = streams.normals(stream, range(start, stop), design.shape[0])
    return xi @ design


def multiplier_draws(
    design: np.ndarray,
    B: int,
    seed: int,
    stream: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """Return the ``(B, p)`` matrix of draws ``sum_u xi_u * design[u]``.

    Work is cut into fixed blocks of ``DRAW_BLOCK`` draws, so the result does not
    depend on ``threads``.
    """
    design = np.ascontiguousarray(design, dtype=float)
    streams = CounterStreams(seed, "bootstrap")
    blocks = [(start, min(start + DRAW_BLOCK, B)) for start in range(0, B, DRAW_BLOCK)]
    if threads == 1 or len(blocks) == 1:
        parts = [_draw_block(streams, stream, start, stop, design) for start, stop in blocks]
    else:
        parts = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_draw_block)(streams, stream, start, stop, design) for start, stop in blocks
        )
    return np.vstack(parts)


def sup_statistics(draws: np.ndarray, n: int, scale: np.ndarray | None = None) -> np.ndarray:
    """``sqrt(n) * max_j |draw_j / scale_j|`` for every draw."""
    scaled = draws if scale is None else draws / scale
    return math.sqrt(n) * np.max(np.abs(scaled), axis=1)


def critical_value(sup_draws: np.ndarray, alpha: float) -> float:
    """The ceil((1 - alpha) B)-th smallest sup draw."""
    alpha = validate_level(alpha)
    B = len(sup_draws)
    rank = min(max(math.ceil((1.0 - alpha) * B - 1e-9), 1), B)
    return float(np.partition(np.asarray(sup_draws), rank - 1)[rank - 1])


def check_scale(scale: np.ndarray) -> None:
    """Raise when any coordinate has a non-positive scale."""
    zero = np.flatnonzero(scale <= 0.0)
    if zero.size:
        raise DegenerateScaleError(zero.tolist())


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Multiplier-bootstrap output shared by the array engines.

    ``sigma_hat`` and ``sigma_tilde`` hold variances; ``scale`` is the standard
    deviation used for studentization (ones in raw mode).
    """

    engine: str
    estimate: np.ndarray
    draws: np.ndarray
    sup_draws: np.ndarray
    sigma_hat: np.ndarray
    sigma_tilde: np.ndarray
    cv: float
    alpha: float
    mode: str
    n: int
    B: int
    seed: int
    bessel: bool = True
    Sigma_hat: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.estimate.shape[0]

    @property
    def scale(self) -> np.ndarray:
        if self.mode == "raw":
            return np.ones(self.p)
        return np.sqrt(self.sigma_tilde if self.bessel else self.sigma_hat)


@dataclass(frozen=True, eq=False)
class BandResult:
    """Uniform rectangle ``estimate +/- half_width`` at level ``1 - alpha``."""

    estimate: np.ndarray
    half_width: np.ndarray
    scale: np.ndarray
    alpha: float
    mode: str
    cv: float
    n: int

    @property
    def lower(self) -> np.ndarray:
        return self.estimate - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.estimate + self.half_width

    def contains(self, truth: np.ndarray | float) -> bool:
        """Whether ``truth`` lies inside the band in every coordinate."""
        truth = np.broadcast_to(np.asarray(truth, dtype=float), self.estimate.shape)
        return bool(np.all((self.lower <= truth) & (truth <= self.upper)))


def finish_bootstrap(result_cls, *, draws: np.ndarray, mode: str, alpha: float, **fields) -> BootstrapResult:
    """Compute sup draws and the critical value, then build the result."""
    alpha = validate_level(alpha)
    bessel = fields.get("bessel", True)
    variance = fields["sigma_tilde"] if bessel else fields["sigma_hat"]
    if mode == "studentized":
        scale = np.sqrt(variance)
        check_scale(scale)
    else:
        scale = None
    sup = sup_statistics(draws, fields["n"], scale)
    cv = critical_value(sup, alpha)
    logger.debug("%s bootstrap: B=%d cv=%.6g mode=%s", fields.get("engine"), len(sup), cv, mode)
    return result_cls(draws=draws, sup_draws=sup, cv=cv, alpha=alpha, mode=mode, B=len(sup), **fields)


def restudentize(result: BootstrapResult, mode: str) -> BootstrapResult:
    """Same draws, sup statistics recomputed under ``mode``."""
    if mode == result.mode:
        return result
    scale = None
    if mode == "studentized":
        scale = np.sqrt(result.sigma_tilde if result.bessel else result.sigma_hat)
        check_scale(scale)
    sup = sup_statistics(result.draws, result.n, scale)
    return replace(result, mode=mode, sup_draws=sup, cv=critical_value(sup, result.alpha))


def confidence_band(
    result: BootstrapResult,
    alpha: float | None = None,
    studentized: bool | None = None,
) -> BandResult:
    """Uniform band ``estimate +/- cv * scale / sqrt(n)``.

    ``alpha`` defaults to the level the result was built with; any other level
    reuses the stored sup draws.
    """
    if studentized is not None and studentized != (result.mode == "studentized"):
        raise ModeMismatchError(result.mode, "studentized" if studentized else "raw")
    alpha = result.alpha if alpha is None else validate_level(alpha)
    cv = result.cv if alpha == result.alpha else critical_value(result.sup_draws, alpha)
    scale = result.scale
    return BandResult(
        estimate=result.estimate,
        half_width=cv * scale / math.sqrt(result.n),
        scale=scale,
        alpha=alpha,
        mode=result.mode,
        cv=cv,
        n=result.n,
    )
