"""Dyadic kernel density estimation with a point mass at zero.

The outcome ``Y_ij`` is zero with probability ``1 - a`` and otherwise has a
density; ``f = b / a`` is that continuous part. Bands are uniform over a grid of
nonzero design points.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from exboot.arrays import DyadicArray
from exboot.exceptions import (
    AsymmetricDataError,
    DegenerateDataError,
    DegenerateScaleError,
    InvalidInputError,
    TooFewUnitsError,
    ZeroMassOnlyError,
)
from exboot.multiplier import critical_value, multiplier_draws, sup_statistics
from exboot.validation import validate_draws, validate_grid, validate_level, validate_seed

logger = logging.getLogger(__name__)

KERNELS = ("epanechnikov", "gaussian", "table")
RULES = ("a", "b")
BANDS = ("constant", "studentized")
DEFAULT_GRID = (-2.0, 2.0, 201)
GRID_CHUNK = 16


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``K`` of order ``r``; ``table`` kernels interpolate linearly."""

    family: str = "epanechnikov"
    order: int = 2
    nodes: np.ndarray | None = None
    heights: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in KERNELS:
            raise InvalidInputError("kernel", self.family, f"must be one of {', '.join(KERNELS)}")
        if self.order < 2:
            raise InvalidInputError("kernel order", self.order, "must be at least 2")
        if self.family == "table":
            if self.nodes is None or self.heights is None or len(self.nodes) != len(self.heights):
                raise InvalidInputError("kernel table", None, "nodes and heights must match")
            if np.any(np.diff(self.nodes) <= 0):
                raise InvalidInputError("kernel table", None, "nodes must increase")

    @classmethod
    def fourth_order_gaussian(cls, half_width: float = 8.0, count: int = 4001) -> "KernelSpec":
        """Tabulated ``(3 - u^2) phi(u) / 2``, a fourth-order kernel."""
        nodes = np.linspace(-half_width, half_width, count)
        heights = 0.5 * (3.0 - nodes**2) * stats.norm.pdf(nodes)
        return cls(family="table", order=4, nodes=nodes, heights=heights)

    @property
    def support(self) -> float:
        """Half-width of the support (inf for the Gaussian)."""
        if self.family == "epanechnikov":
            return 1.0
        if self.family == "gaussian":
            return math.inf
        return float(max(abs(self.nodes[0]), abs(self.nodes[-1])))

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.family == "epanechnikov":
            return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2), 0.0)
        if self.family == "gaussian":
            return stats.norm.pdf(u)
        return np.interp(u, self.nodes, self.heights, left=0.0, right=0.0)

    def scaled(self, u: np.ndarray, h: float) -> np.ndarray:
        """``K_h(u) = K(u / h) / h``."""
        return self(np.asarray(u) / h) / h

    def moment(self, t: int) -> float:
        """``int u^t K(u) du``."""
        if self.family == "table":
            return _piecewise_linear_moment(self.nodes, self.heights, t)
        lo, hi = (-1.0, 1.0) if self.family == "epanechnikov" else (-math.inf, math.inf)
        value, _ = integrate.quad(lambda u: u**t * float(self(u)), lo, hi, epsabs=1e-13, epsrel=1e-13)
        return value

    def validate(self) -> None:
        """Check unit mass and vanishing moments up to ``order - 1``."""
        mass = self.moment(0)
        if abs(mass - 1.0) > 1e-8:
            raise InvalidInputError("kernel", self.family, f"integrates to {mass!r}, not 1")
        for t in range(1, self.order):
            if abs(self.moment(t)) > 1e-5:
                raise InvalidInputError("kernel", self.family, f"moment {t} does not vanish")

    def fourier(self, t: np.ndarray) -> np.ndarray:
        """Characteristic function ``int cos(t u) K(u) du`` (kernels are even)."""
        t = np.asarray(t, dtype=float)
        if self.family == "gaussian":
            return np.exp(-0.5 * t**2)
        if self.family == "epanechnikov":
            small = np.abs(t) < 1e-3
            safe = np.where(small, 1.0, t)
            closed = 3.0 * (np.sin(safe) - safe * np.cos(safe)) / safe**3
            return np.where(small, 1.0 - t**2 / 10.0, closed)
        lo, hi = self.nodes[0], self.nodes[-1]
        values = [
            integrate.quad(lambda u: float(self(u)), lo, hi, weight="cos", wvar=float(s), limit=400)[0]
            for s in np.atleast_1d(t)
        ]
        return np.reshape(values, t.shape)


def _piecewise_linear_moment(nodes: np.ndarray, heights: np.ndarray, t: int) -> float:
    x0, x1 = nodes[:-1], nodes[1:]
    y0, y1 = heights[:-1], heights[1:]
    slope = (y1 - y0) / (x1 - x0)
    intercept = y0 - slope * x0
    part = intercept * (x1 ** (t + 1) - x0 ** (t + 1)) / (t + 1)
    part += slope * (x1 ** (t + 2) - x0 ** (t + 2)) / (t + 2)
    return float(np.sum(part))


def silverman_bandwidth(sigma: float, iqr: float, n: int, rule: str = "a", undersmooth: float = 0.2) -> float:
    """Rule-of-thumb bandwidth with exponent ``-(1/5 + undersmooth)`` in the unit count."""
    if rule not in RULES:
        raise InvalidInputError("bandwidth rule", rule, "must be 'a' or 'b'")
    rate = n ** -(0.2 + undersmooth)
    if rule == "a":
        return 1.06 * sigma * rate
    return 0.9 * min(sigma, iqr / 1.34) * rate


def bandwidth(data: DyadicArray, rule: str = "a", undersmooth: float = 0.2) -> float:
    """Silverman bandwidth from the nonzero unordered-pair outcomes."""
    values = data.upper_pairs()[:, 0]
    values = values[values != 0.0]
    if np.unique(values).size < 2:
        raise DegenerateDataError("fewer than two distinct nonzero outcomes")
    sigma = float(np.std(values, ddof=1))
    iqr = float(stats.iqr(values))
    if sigma == 0.0:
        raise DegenerateDataError("outcome standard deviation is zero")
    h = silverman_bandwidth(sigma, iqr, data.n, rule, undersmooth)
    if h <= 0.0:
        raise DegenerateDataError(f"rule {rule} gives a non-positive bandwidth")
    return h


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Density estimate on a grid with its bootstrap bands."""

    grid: np.ndarray
    a_hat: float
    b_hat: np.ndarray
    f_hat: np.ndarray
    h: float
    a_known_one: bool


@dataclass(frozen=True, eq=False)
class DensityBandResult:
    """Estimate, influence-based scale and both uniform band types on a grid."""

    grid: np.ndarray
    a_hat: float
    b_hat: np.ndarray
    f_hat: np.ndarray
    sigma_tilde: np.ndarray
    S_tilde: np.ndarray
    cv_raw: float
    cv_stud: float | None
    h: float
    n: int
    alpha: float
    B: int
    seed: int
    band: str
    a_known_one: bool

    @property
    def half_width_constant(self) -> np.ndarray:
        return np.full(self.grid.shape, self.cv_raw / math.sqrt(self.n))

    @property
    def half_width_studentized(self) -> np.ndarray | None:
        if self.cv_stud is None:
            return None
        return self.sigma_tilde * self.cv_stud / math.sqrt(self.n)

    def half_width_for(self, band: str) -> np.ndarray:
        """Half widths of the requested band; studentized needs positive scales."""
        if band == "constant":
            return self.half_width_constant
        if self.cv_stud is None:
            raise DegenerateScaleError(np.flatnonzero(self.sigma_tilde <= 0.0).tolist())
        return self.half_width_studentized

    @property
    def half_width(self) -> np.ndarray:
        return self.half_width_for(self.band)

    @property
    def lower(self) -> np.ndarray:
        return self.f_hat - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.f_hat + self.half_width

    def contains(self, truth: np.ndarray, band: str | None = None) -> bool:
        """Whether ``truth`` lies inside the band at every grid point."""
        half = self.half_width_for(band or self.band)
        return bool(np.all(np.abs(np.asarray(truth) - self.f_hat) <= half))


def _check_data(data: DyadicArray) -> None:
    if data.p != 1:
        raise InvalidInputError("p", data.p, "density estimation needs scalar outcomes")
    if not data.symmetric:
        raise AsymmetricDataError()
    if data.n < 3:
        raise TooFewUnitsError(data.n, 3)


def has_zero_outcomes(data: DyadicArray) -> bool:
    """Whether any unordered pair sits on the point mass at zero."""
    return bool(np.any(data.upper_pairs() == 0.0))


def _design_points(data: DyadicArray, grid: np.ndarray | None) -> np.ndarray:
    """Zero is only a valid design point when no outcome sits at the point mass."""
    grid = np.linspace(*DEFAULT_GRID) if grid is None else grid
    return validate_grid(grid, allow_zero=not has_zero_outcomes(data))


def _pair_moments(data: DyadicArray, grid: np.ndarray, kernel: KernelSpec, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit sums over partners: ``R[i, l] = sum_j K_h(y_l - Y_ij) 1(Y_ij != 0)`` and nonzero counts."""
    Y = data.values[:, :, 0]
    nonzero = Y != 0.0
    np.fill_diagonal(nonzero, False)
    counts = nonzero.sum(axis=1).astype(float)
    R = np.zeros((data.n, grid.size))
    for start in range(0, grid.size, GRID_CHUNK):
        block = grid[start : start + GRID_CHUNK]
        smoothed = kernel.scaled(block[None, None, :] - Y[:, :, None], h)
        R[:, start : start + block.size] = np.sum(smoothed * nonzero[:, :, None], axis=1)
    return R, counts


def density_estimate(
    data: DyadicArray,
    grid: np.ndarray | None = None,
    kernel: KernelSpec | None = None,
    h: float | None = None,
    a_known_one: bool = False,
    rule: str = "a",
) -> DensityEstimate:
    """Kernel estimate of the continuous part on ``grid``."""
    _check_data(data)
    grid = _design_points(data, grid)
    kernel = kernel or KernelSpec()
    h = bandwidth(data, rule) if h is None else float(h)
    if h <= 0.0:
        raise InvalidInputError("bandwidth", h, "must be positive")
    R, counts = _pair_moments(data, grid, kernel, h)
    return _estimate_from_moments(data, grid, h, R, counts, a_known_one)


def _estimate_from_moments(data, grid, h, R, counts, a_known_one) -> DensityEstimate:
    ordered_pairs = data.n * (data.n - 1)
    a_hat = float(counts.sum() / ordered_pairs)
    b_hat = R.sum(axis=0) / ordered_pairs
    if a_known_one:
        f_hat = b_hat
    elif a_hat == 0.0:
        raise ZeroMassOnlyError()
    else:
        f_hat = b_hat / a_hat
    return DensityEstimate(grid=grid, a_hat=a_hat, b_hat=b_hat, f_hat=f_hat, h=h, a_known_one=a_known_one)


def density_band(
    data: DyadicArray,
    grid: np.ndarray | None = None,
    kernel: KernelSpec | None = None,
    h: float | None = None,
    alpha: float = 0.1,
    B: int = 500,
    band: str = "constant",
    a_known_one: bool = False,
    seed: int = 0,
    stream: int = 0,
    threads: int = 1,
    rule: str = "a",
) -> DensityBandResult:
    """Uniform confidence band for the density of the nonzero part."""
    if band not in BANDS:
        raise InvalidInputError("band", band, f"must be one of {', '.join(BANDS)}")
    alpha = validate_level(alpha)
    B = validate_draws(B)
    seed = validate_seed(seed)
    _check_data(data)
    grid = _design_points(data, grid)
    kernel = kernel or KernelSpec()
    h = bandwidth(data, rule) if h is None else float(h)
    if h <= 0.0:
        raise InvalidInputError("bandwidth", h, "must be positive")
    R, counts = _pair_moments(data, grid, kernel, h)
    estimate = _estimate_from_moments(data, grid, h, R, counts, a_known_one)
    if estimate.a_hat == 0.0:
        raise ZeroMassOnlyError()

    n = data.n
    a = 1.0 if a_known_one else estimate.a_hat
    # Row sums of the influence terms X~_ij over partners j.
    row_sums = R / a - np.outer(counts, estimate.b_hat / a**2)
    S_tilde = row_sums.sum(axis=0) / (n * (n - 1))
    centered = 2.0 * row_sums / (n - 1) - 2.0 * S_tilde
    sigma_tilde = np.sqrt(np.sum(centered**2, axis=0) / n)

    draws = multiplier_draws(centered / n, B, seed, stream, threads)
    cv_raw = critical_value(sup_statistics(draws, n), alpha)
    degenerate = np.flatnonzero(sigma_tilde <= 0.0)
    if degenerate.size and band == "studentized":
        raise DegenerateScaleError(degenerate.tolist())
    cv_stud = None if degenerate.size else critical_value(sup_statistics(draws, n, sigma_tilde), alpha)
    logger.info("Density band over %d design points, h=%.6g, a_hat=%.6g", grid.size, h, estimate.a_hat)
    return DensityBandResult(
        grid=grid,
        a_hat=estimate.a_hat,
        b_hat=estimate.b_hat,
        f_hat=estimate.f_hat,
        sigma_tilde=sigma_tilde,
        S_tilde=S_tilde,
        cv_raw=cv_raw,
        cv_stud=cv_stud,
        h=h,
        n=n,
        alpha=alpha,
        B=B,
        seed=seed,
        band=band,
        a_known_one=a_known_one,
    )
