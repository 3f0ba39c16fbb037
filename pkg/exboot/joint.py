"""Inference for jointly exchangeable (dyadic and polyadic) arrays."""

import itertools
import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from exboot.arrays import DyadicArray, PolyadicArray
from exboot.enumeration import DEFAULT_BUDGET, LatentGrid, LatentLaw, nonzero_patterns
from exboot.exceptions import InvalidInputError, TooFewUnitsError
from exboot.multiplier import MODES, BootstrapResult, finish_bootstrap, multiplier_draws
from exboot.validation import validate_draws, validate_mode, validate_seed

logger = logging.getLogger(__name__)

JointArray = DyadicArray | PolyadicArray


@dataclass(frozen=True, eq=False)
class PolyadicMeans:
    """Polyadic sample mean ``S_n`` and projection estimates ``W_hat`` (n x p)."""

    S_n: np.ndarray
    W_hat: np.ndarray
    K: int

    def centered(self) -> np.ndarray:
        return self.W_hat - self.K * self.S_n


@dataclass(frozen=True, eq=False)
class JointBootstrapResult(BootstrapResult):
    """Joint-engine band; ``arity`` is the number of units per cell."""

    arity: int = 2


def polyadic_means(array: JointArray) -> PolyadicMeans:
    """Per-unit averages over every cell the unit appears in."""
    n, K = array.n, array.K
    if n < K + 1:
        raise TooFewUnitsError(n, K + 1)
    values = array.values
    if K == 2:
        # Each ordered pair lands on both endpoints: row sums plus column sums.
        total_by_unit = values.sum(axis=1) + values.sum(axis=0)
    else:
        total_by_unit = np.zeros((n, array.p))
        for k in range(K):
            others = tuple(a for a in range(K) if a != k)
            total_by_unit += values.sum(axis=others)
    tuples = math.perm(n, K)
    S_n = values.reshape(-1, array.p).sum(axis=0) / tuples
    W_hat = total_by_unit * (math.factorial(n - K) / math.factorial(n - 1))
    return PolyadicMeans(S_n=S_n, W_hat=W_hat, K=K)


def symmetrize(array: DyadicArray) -> DyadicArray:
    """Average the two ordered slots of every pair."""
    if array.symmetric:
        return array
    values = 0.5 * (array.values + array.values.transpose(1, 0, 2))
    return DyadicArray(values, symmetric=True)


def variance_estimates(means: PolyadicMeans) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal variances with divisors ``n`` and ``n - 1``."""
    centered = means.centered()
    n = centered.shape[0]
    squares = np.sum(centered**2, axis=0)
    return squares / n, squares / (n - 1)


def conditional_covariance(means: PolyadicMeans) -> np.ndarray:
    """Covariance of the centered per-unit means."""
    centered = means.centered()
    return centered.T @ centered / centered.shape[0]


def bootstrap(
    array: JointArray,
    B: int = 500,
    alpha: float = 0.1,
    mode: str = "studentized",
    seed: int = 0,
    stream: int = 0,
    threads: int = 1,
    bessel: bool = True,
    covariance: bool = False,
) -> JointBootstrapResult:
    """Multiplier bootstrap with one Gaussian weight per unit."""
    B = validate_draws(B)
    mode = validate_mode(mode, MODES)
    seed = validate_seed(seed)
    if array.n < 3:
        raise TooFewUnitsError(array.n, 3)
    means = polyadic_means(array)
    sigma_hat, sigma_tilde = variance_estimates(means)
    draws = multiplier_draws(means.centered() / array.n, B, seed, stream, threads)
    logger.info("Joint bootstrap over n=%d units (K=%d) with B=%d", array.n, array.K, B)
    return finish_bootstrap(
        JointBootstrapResult,
        draws=draws,
        mode=mode,
        alpha=alpha,
        engine="joint",
        estimate=means.S_n,
        sigma_hat=sigma_hat,
        sigma_tilde=sigma_tilde,
        n=array.n,
        seed=seed,
        bessel=bessel,
        Sigma_hat=conditional_covariance(means) if covariance else None,
        arity=array.K,
    )


@dataclass(frozen=True)
class SilvermanCheck:
    """Two covariance estimates of the same statistic, side by side."""

    Sigma: np.ndarray
    Sigma_S: np.ndarray

    @property
    def max_abs_diff(self) -> float:
        return float(np.max(np.abs(self.Sigma - self.Sigma_S)))


def silverman_covariance_check(
    K: int,
    laws: Mapping[int, LatentLaw],
    generator: Callable[[dict[tuple[int, ...], float]], object] | None = None,
    table: np.ndarray | None = None,
    budget: int = DEFAULT_BUDGET,
) -> SilvermanCheck:
    """Compare ``E[W_1 W_1^T]`` with ``K^2 E[Xc_(1..K) Xc_(1,K+1..2K)^T]`` exactly.

    Latents are attached to the nonempty subsets of the K positions of the tuple
    ``(1, ..., K)``; a subset of size r draws from ``laws[r]``. ``generator``
    receives a mapping from pattern to latent value, as for the Hoeffding oracle.
    """
    patterns = nonzero_patterns(K)
    try:
        grid = LatentGrid([laws[sum(e)] for e in patterns], budget)
    except KeyError as e:
        raise InvalidInputError("latent laws", sorted(laws), "need one law per subset size") from e
    if table is None:
        if generator is None:
            raise InvalidInputError("generator", None, "pass a generator or a table")
        table = grid.tabulate(lambda point: generator(dict(zip(patterns, point, strict=True))))
    table = np.asarray(table, dtype=float)
    table = table - grid.mean(table)

    position = {e: axis for axis, e in enumerate(patterns)}
    singles = [position[tuple(int(k == j) for k in range(K))] for j in range(K)]
    p = table.shape[-1]

    # h_k(u) = E[X | U_k = u]; W(u) = sum_k h_k(u).
    W = np.zeros((len(laws[1].support), p))
    for axis in singles:
        W += _marginal(grid, table, axis)
    weights = laws[1].weights
    Sigma = (W * weights[:, None]).T @ W

    symmetrized = np.zeros_like(table)
    for perm in itertools.permutations(range(K)):
        order = [0] * len(patterns)
        for e in patterns:
            image = tuple(e[perm.index(k)] for k in range(K))
            order[position[image]] = position[e]
        symmetrized += np.transpose(table, order + [len(patterns)])
    symmetrized /= math.factorial(K)
    m = _marginal(grid, symmetrized, singles[0])
    Sigma_S = K**2 * (m * weights[:, None]).T @ m
    return SilvermanCheck(Sigma=Sigma, Sigma_S=Sigma_S)


def _marginal(grid: LatentGrid, table: np.ndarray, axis: int) -> np.ndarray:
    """E[table | latent on ``axis``] as a (support, p) matrix."""
    conditional = grid.expectation(table, {axis})
    index = [0] * (table.ndim - 1)
    index[axis] = slice(None)
    return np.array(conditional[tuple(index)])
