"""Lasso for multiway-clustered designs with a bootstrap-calibrated penalty.

The objective is ``(1/N) ||Y - X beta||^2 + lambda ||beta||_1`` without an
intercept. The penalty is ``2 c`` times the ``1 - eta`` quantile of the
multiplier sup-norm of the clustered score ``eps_i X_i``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from exboot.arrays import MultiwayArray, load_multiway_csv
from exboot.exceptions import InvalidInputError, NotConvergedError
from exboot.multiplier import critical_value, multiplier_draws
from exboot.rng import CounterStreams
from exboot.separable import leave_one_index_means, multiplier_design
from exboot.validation import validate_draws, validate_level, validate_seed, validate_slack

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.1
DEFAULT_SLACK = 1.1


@dataclass(frozen=True, eq=False)
class ClusteredRegression:
    """Outcomes ``Y`` (p = 1) and regressors ``X`` on the same cluster grid."""

    Y: MultiwayArray
    X: MultiwayArray

    def __post_init__(self):
        if self.Y.p != 1:
            raise InvalidInputError("Y", self.Y.p, "outcome array must be scalar")
        if self.Y.dims != self.X.dims:
            raise InvalidInputError("dims", (self.Y.dims, self.X.dims), "Y and X must share dims")

    @classmethod
    def from_csv(cls, stream: TextIO, K: int, p: int) -> "ClusteredRegression":
        """Read ``i_1..i_K, y, x_1..x_p`` rows."""
        joined = load_multiway_csv(stream, K, p + 1)
        return cls(Y=MultiwayArray(joined.values[..., :1]), X=MultiwayArray(joined.values[..., 1:]))

    @property
    def N(self) -> int:
        return self.Y.size

    def flatten(self) -> tuple[np.ndarray, np.ndarray]:
        """Outcomes and design stacked over cells."""
        return self.Y.flat()[:, 0], self.X.flat()


@dataclass(frozen=True, eq=False)
class LassoFit:
    """Solution at one penalty; ``iterations`` counts every coordinate sweep."""

    beta: np.ndarray
    lam: float
    objective: float
    iterations: int
    converged: bool
    kkt_violation: float
    objective_trace: tuple[float, ...] = field(default=())

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


@dataclass(frozen=True, eq=False)
class PenaltyChoice:
    """Bootstrap penalty and the draws it was read from."""

    lambda0: float
    lam: float
    eta: float
    c: float
    Lambda_draws: np.ndarray


def soft_threshold(z: float, t: float) -> float:
    """Shrink ``z`` toward zero by ``t``."""
    return math.copysign(max(abs(z) - t, 0.0), z)


def kkt_violation(y: np.ndarray, X: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Largest breach of the Lasso stationarity conditions."""
    gradient = 2.0 / len(y) * X.T @ (y - X @ beta)
    zero = beta == 0.0
    breach = np.where(
        zero,
        np.maximum(np.abs(gradient) - lam, 0.0),
        np.abs(gradient - lam * np.sign(beta)),
    )
    return float(breach.max()) if breach.size else 0.0


def lasso_solve(
    y: np.ndarray,
    X: np.ndarray,
    lam: float,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    warm_start: np.ndarray | None = None,
    raise_on_failure: bool = False,
) -> LassoFit:
    """Cyclic coordinate descent with covariance updates and active-set sweeps.

    ``max_iter`` caps the total number of sweeps, full and active-set alike.
    """
    if lam < 0:
        raise InvalidInputError("lambda", lam, "must be non-negative")
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise InvalidInputError("data", "non-finite", "Y and X must be finite")
    N, p = X.shape
    gram = 2.0 / N * X.T @ X
    score = 2.0 / N * X.T @ y
    yy = float(y @ y) / N
    diag = np.diag(gram).copy()
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    gradient = score - gram @ beta

    def objective() -> float:
        return yy - float(score @ beta) + 0.5 * float(beta @ gram @ beta) + lam * float(np.abs(beta).sum())

    def sweep(coordinates) -> float:
        largest = 0.0
        for j in coordinates:
            if diag[j] == 0.0:
                continue
            old = beta[j]
            new = soft_threshold(gradient[j] + diag[j] * old, lam) / diag[j]
            if new != old:
                gradient[:] -= gram[:, j] * (new - old)
                beta[j] = new
                largest = max(largest, abs(new - old) * math.sqrt(diag[j]))
        return largest

    trace = [objective()]
    violation = math.inf
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        sweep(range(p))
        trace.append(objective())
        active = np.flatnonzero(beta)
        while iterations < max_iter:
            iterations += 1
            if sweep(active) <= tol * 1e-2:
                break
        violation = kkt_violation(y, X, beta, lam)
        if violation <= tol:
            break
        gradient = score - gram @ beta

    converged = violation <= tol
    if not converged:
        logger.warning("Coordinate descent did not converge: KKT violation %.3e", violation)
        if raise_on_failure:
            raise NotConvergedError(iterations, violation)
    return LassoFit(
        beta=beta,
        lam=float(lam),
        objective=objective(),
        iterations=iterations,
        converged=converged,
        kkt_violation=violation,
        objective_trace=tuple(trace),
    )


def preliminary_penalty(n: int, p: int) -> float:
    """``log(n) * sqrt(log(p) / n)``."""
    if n < 2:
        raise InvalidInputError("n", n, "must be at least 2")
    if p < 2:
        raise InvalidInputError("p", p, "log p vanishes for a single regressor")
    return math.log(n) * math.sqrt(math.log(p) / n)


def score_array(problem: ClusteredRegression, beta: np.ndarray) -> MultiwayArray:
    """Array of ``eps_i X_i`` with residuals from ``beta``."""
    y, X = problem.flatten()
    residuals = y - X @ beta
    return MultiwayArray((residuals[:, None] * X).reshape(problem.X.values.shape))


def tuned_penalty(
    problem: ClusteredRegression,
    eta: float = DEFAULT_ETA,
    c: float = DEFAULT_SLACK,
    B: int = 500,
    seed: int = 0,
    threads: int = 1,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> tuple[PenaltyChoice, LassoFit]:
    """Bootstrap penalty; also returns the preliminary fit it was built on."""
    eta = validate_level(eta, "eta")
    c = validate_slack(c)
    B = validate_draws(B)
    seed = validate_seed(seed)
    lambda0 = preliminary_penalty(problem.Y.n, problem.X.p)
    y, X = problem.flatten()
    preliminary = lasso_solve(y, X, lambda0, tol=tol, max_iter=max_iter)
    scores = score_array(problem, preliminary.beta)
    projections = leave_one_index_means(scores)
    draws = multiplier_draws(multiplier_design(projections, scores.dims), B, seed, 0, threads)
    Lambda_draws = np.max(np.abs(draws), axis=1)
    quantile = critical_value(Lambda_draws, eta)
    lam = 2.0 * c * quantile
    logger.info("Penalty: lambda0=%.6g, tuned lambda=%.6g", lambda0, lam)
    choice = PenaltyChoice(lambda0=lambda0, lam=lam, eta=eta, c=c, Lambda_draws=Lambda_draws)
    return choice, preliminary


def fit(
    problem: ClusteredRegression,
    eta: float = DEFAULT_ETA,
    c: float = DEFAULT_SLACK,
    B: int = 500,
    seed: int = 0,
    threads: int = 1,
    beta_ref: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> tuple[LassoFit, PenaltyChoice, float | None]:
    """Tune the penalty, refit and optionally measure the prediction error."""
    choice, preliminary = tuned_penalty(problem, eta, c, B, seed, threads, tol, max_iter)
    y, X = problem.flatten()
    final = lasso_solve(y, X, choice.lam, tol=tol, max_iter=max_iter, warm_start=preliminary.beta)
    prediction_norm = None
    if beta_ref is not None:
        prediction_norm = prediction_error(X, final.beta, beta_ref)
    return final, choice, prediction_norm


def prediction_error(X: np.ndarray, beta: np.ndarray, beta_ref: np.ndarray) -> float:
    """Empirical ``||X (beta - beta_ref)||_{N,2}``."""
    fitted = X @ (np.asarray(beta) - np.asarray(beta_ref))
    return float(math.sqrt(np.mean(fitted**2)))


def restricted_eigenvalue_diagnostic(
    X: np.ndarray,
    s: int,
    c0: float = 3.0,
    draws: int = 200,
    seed: int = 0,
) -> float:
    """Smallest ``sqrt(s) ||X theta||_{N,2} / ||theta_J||_1`` over random cone directions.

    Each draw picks a support J of size ``s``, random signs on J and an
    off-support part whose l1 norm is a uniform fraction of ``c0 ||theta_J||_1``.
    This is an upper bound on the restricted eigenvalue, not a certificate.
    """
    N, p = X.shape
    if not 1 <= s <= p:
        raise InvalidInputError("s", s, f"must lie in 1..{p}")
    worst = math.inf
    for index in range(draws):
        rng = CounterStreams(seed, "diagnostic").generator(0, index)
        support = rng.choice(p, size=s, replace=False)
        theta = np.zeros(p)
        theta[support] = rng.choice([-1.0, 1.0], size=s) * rng.uniform(0.5, 1.5, size=s)
        inside = np.abs(theta[support]).sum()
        outside = np.setdiff1d(np.arange(p), support)
        if outside.size:
            spread = rng.standard_normal(outside.size)
            spread *= rng.uniform() * c0 * inside / max(np.abs(spread).sum(), 1e-300)
            theta[outside] = spread
        value = math.sqrt(s) * math.sqrt(np.mean((X @ theta) ** 2)) / inside
        worst = min(worst, value)
    return worst
