"""Inference for separately exchangeable (multiway-clustered) arrays."""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from exboot.arrays import MultiwayArray
from exboot.enumeration import (
    DEFAULT_BUDGET,
    LatentGrid,
    LatentLaw,
    Pattern,
    is_below,
    nonzero_patterns,
    pattern_laws,
)
from exboot.exceptions import InvalidInputError, TooFewUnitsError
from exboot.multiplier import (
    MODES,
    BootstrapResult,
    finish_bootstrap,
    multiplier_draws,
)
from exboot.validation import validate_draws, validate_mode, validate_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LeaveOneIndexMeans:
    """Per-axis matrices whose row ``i_k`` averages every cell with that index."""

    means: tuple[np.ndarray, ...]
    estimate: np.ndarray

    def deviations(self) -> tuple[np.ndarray, ...]:
        return tuple(m - self.estimate for m in self.means)


@dataclass(frozen=True, eq=False)
class SepBootstrapResult(BootstrapResult):
    """Separable-engine band; ``dims`` is the array shape without ``p``."""

    dims: tuple[int, ...] = ()


def sample_mean(array: MultiwayArray) -> np.ndarray:
    """Grand mean over all cells."""
    return array.flat().mean(axis=0)


def leave_one_index_means(array: MultiwayArray) -> LeaveOneIndexMeans:
    """Means over every index but one, one array per axis."""
    means = []
    for k in range(array.K):
        others = tuple(a for a in range(array.K) if a != k)
        means.append(array.values.mean(axis=others) if others else np.array(array.values))
    return LeaveOneIndexMeans(means=tuple(means), estimate=sample_mean(array))


def variance_estimates(array: MultiwayArray, projections: LeaveOneIndexMeans | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(sigma_hat^2, sigma_tilde^2)``, the second with Bessel factors."""
    projections = projections or leave_one_index_means(array)
    n = array.n
    sigma_hat = np.zeros(array.p)
    sigma_tilde = np.zeros(array.p)
    for size, dev in zip(array.dims, projections.deviations(), strict=True):
        squares = np.sum(dev**2, axis=0)
        sigma_hat += n / size**2 * squares
        sigma_tilde += n / (size * (size - 1)) * squares
    return sigma_hat, sigma_tilde


def conditional_covariance(array: MultiwayArray, projections: LeaveOneIndexMeans | None = None) -> np.ndarray:
    """Covariance of ``sqrt(n) S^MB`` given the data."""
    projections = projections or leave_one_index_means(array)
    n = array.n
    Sigma = np.zeros((array.p, array.p))
    for size, dev in zip(array.dims, projections.deviations(), strict=True):
        Sigma += n / size**2 * dev.T @ dev
    return Sigma


def multiplier_design(projections: LeaveOneIndexMeans, dims: tuple[int, ...]) -> np.ndarray:
    """Stack ``(Xbar_{k,i} - S) / N_k`` over axes, one row per multiplier."""
    return np.vstack([dev / size for size, dev in zip(dims, projections.deviations(), strict=True)])


def _check_sizes(array: MultiwayArray) -> None:
    if array.n < 2:
        raise TooFewUnitsError(array.n, 2, "levels on the smallest axis")


def bootstrap(
    array: MultiwayArray,
    B: int = 500,
    alpha: float = 0.1,
    mode: str = "studentized",
    seed: int = 0,
    stream: int = 0,
    threads: int = 1,
    bessel: bool = True,
    covariance: bool = False,
) -> SepBootstrapResult:
    """Multiplier bootstrap of the sample mean with Gaussian weights per axis index."""
    _check_sizes(array)
    B = validate_draws(B)
    mode = validate_mode(mode, MODES)
    seed = validate_seed(seed)
    projections = leave_one_index_means(array)
    sigma_hat, sigma_tilde = variance_estimates(array, projections)
    draws = multiplier_draws(multiplier_design(projections, array.dims), B, seed, stream, threads)
    logger.info("Separable bootstrap over dims %s with B=%d", array.dims, B)
    return finish_bootstrap(
        SepBootstrapResult,
        draws=draws,
        mode=mode,
        alpha=alpha,
        engine="separable",
        estimate=projections.estimate,
        sigma_hat=sigma_hat,
        sigma_tilde=sigma_tilde,
        n=array.n,
        seed=seed,
        bessel=bessel,
        Sigma_hat=conditional_covariance(array, projections) if covariance else None,
        dims=array.dims,
    )


@dataclass(frozen=True, eq=False)
class HoeffdingOracleInstance:
    """Finite-support generator ``X_i = g((U_{i.e})_e)`` for one multi-index.

    ``table`` holds g on the latent grid, one axis per nonzero pattern e in
    :func:`nonzero_patterns` order, plus a value axis.
    """

    K: int
    laws: tuple[LatentLaw, ...]
    table: np.ndarray
    budget: int = DEFAULT_BUDGET
    patterns: tuple[Pattern, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(nonzero_patterns(self.K)))
        if len(self.laws) != len(self.patterns):
            raise InvalidInputError("laws", len(self.laws), f"need one law per pattern ({len(self.patterns)})")
        expected = tuple(len(law.support) for law in self.laws)
        if self.table.shape[:-1] != expected:
            raise InvalidInputError("table", self.table.shape, f"grid shape must be {expected} + (p,)")

    @classmethod
    def from_function(
        cls,
        K: int,
        laws: Mapping[Pattern, LatentLaw] | Mapping[int, LatentLaw],
        generator: Callable[[dict[Pattern, float]], object],
        budget: int = DEFAULT_BUDGET,
    ) -> "HoeffdingOracleInstance":
        """Tabulate ``generator``, called with a mapping pattern -> latent value."""
        patterns = nonzero_patterns(K)
        resolved = pattern_laws(patterns, laws)
        grid = LatentGrid(resolved, budget)
        table = grid.tabulate(lambda point: generator(dict(zip(patterns, point, strict=True))))
        return cls(K=K, laws=tuple(resolved), table=table, budget=budget)

    @property
    def grid(self) -> LatentGrid:
        return LatentGrid(self.laws, self.budget)

    def axes_below(self, e: Pattern) -> set[int]:
        return {axis for axis, f in enumerate(self.patterns) if is_below(f, e)}


@dataclass(frozen=True, eq=False)
class HoeffdingComponents:
    """Hoeffding decomposition of an oracle table."""

    instance: HoeffdingOracleInstance
    mean: np.ndarray
    components: dict[Pattern, np.ndarray]

    def reconstruct(self) -> np.ndarray:
        """Mean plus every component."""
        return sum(self.components.values()) + self.mean

    def reconstruction_error(self) -> float:
        """Largest gap between the reconstruction and the table."""
        return float(np.max(np.abs(self.reconstruct() - self.instance.table)))

    def degenerate_mean_error(self) -> float:
        """Largest |E[W_e | U_{e'}, e' <= e - e_l]| over patterns e and l in e."""
        grid = self.instance.grid
        worst = 0.0
        for e, component in self.components.items():
            for position, bit in enumerate(e):
                if not bit:
                    continue
                reduced = tuple(0 if k == position else b for k, b in enumerate(e))
                keep = self.instance.axes_below(reduced) if any(reduced) else set()
                worst = max(worst, float(np.max(np.abs(grid.expectation(component, keep)))))
        return worst


def hoeffding_oracle(instance: HoeffdingOracleInstance) -> HoeffdingComponents:
    """Decompose ``X_i - E X_i`` into components indexed by nonzero patterns."""
    grid = instance.grid
    table = instance.table
    mean = grid.mean(table)
    components: dict[Pattern, np.ndarray] = {}
    for e in instance.patterns:
        component = np.array(grid.expectation(table, instance.axes_below(e))) - mean
        for f, lower in components.items():
            if is_below(f, e):
                component -= lower
        components[e] = component
    return HoeffdingComponents(instance=instance, mean=mean, components=components)
