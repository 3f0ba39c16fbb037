"""Monte Carlo designs and coverage experiments.

Latent vectors are ``N(0, Sigma_Z)`` with ``Sigma_Z[r, c] = 4^{-|r-c|}``, or the
mixture ``B N(0, Sigma_Z) + (1 - B) N(0, 2 Sigma_Z)`` with one Bernoulli(1/2)
per latent vector.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, linalg

from exboot import density, joint, separable
from exboot.arrays import DyadicArray, MultiwayArray
from exboot.exceptions import InvalidInputError
from exboot.multiplier import confidence_band, restudentize
from exboot.rng import CounterStreams
from exboot.validation import validate_draws, validate_level, validate_seed, validate_threads

logger = logging.getLogger(__name__)

FAMILIES = ("separable_k2", "separable_k3", "dyadic", "dyadic_density")
ARRAY_BASES = ("gaussian", "mixture")
DENSITY_BASES = ("gaussian", "logistic")
ARRAY_MODES = ("raw", "studentized")
DENSITY_MODES = ("constant", "studentized")
ENGINES = {
    "separable_k2": "separable",
    "separable_k3": "separable",
    "dyadic": "joint",
    "dyadic_density": "density",
}


@dataclass(frozen=True)
class DesignSpec:
    """One simulation design. ``dims`` is ``(N1, N2[, N3])`` or ``(n,)``."""

    family: str
    base: str = "gaussian"
    p: int = 25
    dims: tuple[int, ...] = (25, 25)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError("family", self.family, f"must be one of {', '.join(FAMILIES)}")
        bases = DENSITY_BASES if self.family == "dyadic_density" else ARRAY_BASES
        if self.base not in bases:
            raise InvalidInputError("base", self.base, f"must be one of {', '.join(bases)}")
        expected = {"separable_k2": 2, "separable_k3": 3, "dyadic": 1, "dyadic_density": 1}[self.family]
        if len(self.dims) != expected:
            raise InvalidInputError("dims", self.dims, f"{self.family} takes {expected} size(s)")
        if min(self.dims) < 2 or self.p < 1:
            raise InvalidInputError("dims", self.dims, "all sizes must be at least 2 and p >= 1")
        if self.family == "dyadic_density" and self.p != 1:
            raise InvalidInputError("p", self.p, "density designs are scalar")

    @property
    def engine(self) -> str:
        return ENGINES[self.family]


@dataclass(frozen=True)
class DensityOptions:
    """Estimator settings for density designs; ``grid`` is ``(lo, hi, count)``."""

    rule: str = "a"
    grid: tuple[float, float, int] = density.DEFAULT_GRID
    kernel: str = "epanechnikov"
    a_known_one: bool = False
    undersmooth: float = 0.2


@dataclass
class CoverageReport:
    """Per-cell coverage counts of one experiment."""

    design: DesignSpec
    reps: int
    B: int
    levels: tuple[float, ...]
    modes: tuple[str, ...]
    coverage: dict[tuple[float, str], float] = field(default_factory=dict)
    wall_time: float = 0.0
    density_options: DensityOptions | None = None

    def rows(self) -> list[dict]:
        """One row per level and mode."""
        return [
            {
                "design": f"{self.design.family}/{self.design.base}",
                "p": self.design.p,
                "dims": "x".join(str(d) for d in self.design.dims),
                "level": level,
                "mode": mode,
                "coverage": self.coverage[(level, mode)],
                "reps": self.reps,
                "B": self.B,
            }
            for level in self.levels
            for mode in self.modes
        ]

    def to_dict(self) -> dict:
        """Everything needed to rerun the experiment, without the wall time."""
        payload = {
            "design": asdict(self.design),
            "reps": self.reps,
            "B": self.B,
            "levels": list(self.levels),
            "modes": list(self.modes),
        }
        if self.density_options is not None:
            payload["density"] = asdict(self.density_options)
        payload["cells"] = self.rows()
        return payload


def sigma_z(p: int) -> np.ndarray:
    """Toeplitz covariance with entries ``4^{-|r-c|}``."""
    if p < 1:
        raise InvalidInputError("p", p, "must be at least 1")
    lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return 4.0 ** (-lags.astype(float))


def _latents(rng: np.random.Generator, shape: tuple[int, ...], chol: np.ndarray, base: str) -> np.ndarray:
    """Latent vectors of shape ``shape + (p,)``."""
    z = rng.standard_normal(shape + (chol.shape[0],)) @ chol.T
    if base == "mixture":
        heavy = rng.random(shape) >= 0.5
        z = np.where(heavy[..., None], math.sqrt(2.0) * z, z)
    return z


def gen_separable(spec: DesignSpec, rng: np.random.Generator) -> MultiwayArray:
    """Draw a two-way or three-way array from a separable design."""
    chol = linalg.cholesky(sigma_z(spec.p), lower=True)
    if spec.family == "separable_k2":
        n1, n2 = spec.dims
        z1 = _latents(rng, (n1,), chol, spec.base)
        z2 = _latents(rng, (n2,), chol, spec.base)
        z12 = _latents(rng, (n1, n2), chol, spec.base)
        values = 0.25 * (z1[:, None] + z2[None, :]) + 0.5 * z12
    elif spec.family == "separable_k3":
        n1, n2, n3 = spec.dims
        z1 = _latents(rng, (n1,), chol, spec.base)[:, None, None]
        z2 = _latents(rng, (n2,), chol, spec.base)[None, :, None]
        z3 = _latents(rng, (n3,), chol, spec.base)[None, None, :]
        z12 = _latents(rng, (n1, n2), chol, spec.base)[:, :, None]
        z13 = _latents(rng, (n1, n3), chol, spec.base)[:, None, :]
        z23 = _latents(rng, (n2, n3), chol, spec.base)[None, :, :]
        z123 = _latents(rng, (n1, n2, n3), chol, spec.base)
        values = (z1 + z2 + z3 + z12 + z13 + z23) / 12.0 + 0.5 * z123
    else:
        raise InvalidInputError("family", spec.family, "not a separable design")
    return MultiwayArray(values)


def _symmetric_pairs(rng: np.random.Generator, n: int, draw) -> np.ndarray:
    """Fill ``(n, n, ...)`` symmetrically from draws for the pairs i < j."""
    rows, cols = np.triu_indices(n, k=1)
    pairs = draw(rng, (rows.size,))
    out = np.zeros((n, n) + pairs.shape[1:])
    out[rows, cols] = pairs
    out[cols, rows] = pairs
    return out


def gen_dyadic(spec: DesignSpec, rng: np.random.Generator) -> DyadicArray:
    """Draw a symmetric dyadic array with vector outcomes."""
    if spec.family != "dyadic":
        raise InvalidInputError("family", spec.family, "not a dyadic design")
    (n,) = spec.dims
    chol = linalg.cholesky(sigma_z(spec.p), lower=True)
    units = _latents(rng, (n,), chol, spec.base)
    pairs = _symmetric_pairs(rng, n, lambda g, shape: _latents(g, shape, chol, spec.base))
    values = 0.25 * (units[:, None] + units[None, :]) + 0.5 * pairs
    return DyadicArray(values, symmetric=True)


def _scalar_latents(rng: np.random.Generator, shape: tuple[int, ...], base: str) -> np.ndarray:
    if base == "logistic":
        return rng.logistic(0.0, 1.0, size=shape)
    return rng.standard_normal(shape)


def gen_dyadic_density(spec: DesignSpec, rng: np.random.Generator) -> DyadicArray:
    """Draw a symmetric dyadic array with a point mass at zero."""
    if spec.family != "dyadic_density":
        raise InvalidInputError("family", spec.family, "not a density design")
    (n,) = spec.dims
    units = _scalar_latents(rng, (n,), spec.base)
    pairs = _symmetric_pairs(rng, n, lambda g, shape: _scalar_latents(g, shape, spec.base))
    values = 0.25 * (units[:, None] + units[None, :]) + 0.5 * pairs
    return DyadicArray(values[..., None], symmetric=True)


def generate(spec: DesignSpec, rng: np.random.Generator) -> MultiwayArray | DyadicArray:
    """Dispatch on the design family."""
    if spec.family.startswith("separable"):
        return gen_separable(spec, rng)
    if spec.family == "dyadic":
        return gen_dyadic(spec, rng)
    return gen_dyadic_density(spec, rng)


class SurrogateDensity:
    """Exact density of ``(U_i + U_j)/4 + U_ij/2`` and its kernel-smoothed version.

    Both come from inverting the characteristic function
    ``phi(t/4)^2 phi(t/2)`` of the latent law.
    """

    upper = 60.0

    def __init__(self, base: str, kernel: density.KernelSpec | None = None):
        if base not in DENSITY_BASES:
            raise InvalidInputError("base", base, f"must be one of {', '.join(DENSITY_BASES)}")
        self.base = base
        self.kernel = kernel or density.KernelSpec()

    def _latent_cf(self, t: np.ndarray) -> np.ndarray:
        if self.base == "gaussian":
            return np.exp(-0.5 * t**2)
        x = math.pi * np.asarray(t, dtype=float)
        small = np.abs(x) < 1e-8
        return np.where(small, 1.0, x / np.sinh(np.where(small, 1.0, x)))

    def characteristic(self, t: np.ndarray) -> np.ndarray:
        return self._latent_cf(t / 4.0) ** 2 * self._latent_cf(t / 2.0)

    def _invert(self, y: np.ndarray, smoother) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        value, _ = integrate.quad_vec(
            lambda t: np.cos(t * y) * self.characteristic(t) * smoother(t),
            0.0,
            self.upper,
            epsabs=1e-12,
            epsrel=1e-10,
        )
        return value / math.pi

    def density(self, y: np.ndarray) -> np.ndarray:
        return self._invert(y, lambda t: 1.0)

    def smoothed(self, y: np.ndarray, h: float) -> np.ndarray:
        """``f_h(y) = int K_h(y - z) f(z) dz``."""
        return self._invert(y, lambda t: self.kernel.fourier(h * t))


def _replicate(
    spec: DesignSpec,
    rep: int,
    B: int,
    levels: tuple[float, ...],
    modes: tuple[str, ...],
    seed: int,
    options: DensityOptions,
) -> dict[tuple[float, str], bool]:
    rng = CounterStreams(seed, "data").generator(rep)
    data = generate(spec, rng)
    hits: dict[tuple[float, str], bool] = {}
    if spec.engine == "density":
        kernel = density.KernelSpec(family=options.kernel)
        grid = np.linspace(*options.grid)
        h = density.bandwidth(data, options.rule, options.undersmooth)
        truth = SurrogateDensity(spec.base, kernel).smoothed(grid, h)
        band = "studentized" if "studentized" in modes else "constant"
        for level in levels:
            result = density.density_band(
                data, grid, kernel, h, alpha=1.0 - level, B=B, band=band,
                a_known_one=options.a_known_one, seed=seed, stream=rep,
            )
            for mode in modes:
                hits[(level, mode)] = result.contains(truth, band=mode)
        return hits

    engine = separable if spec.engine == "separable" else joint
    result = engine.bootstrap(data, B=B, alpha=1.0 - levels[0], mode="raw", seed=seed, stream=rep)
    truth = np.zeros(spec.p)
    for mode in modes:
        moded = restudentize(result, mode)
        for level in levels:
            hits[(level, mode)] = confidence_band(moded, alpha=1.0 - level).contains(truth)
    return hits


def coverage_experiment(
    spec: DesignSpec,
    reps: int = 500,
    B: int = 500,
    levels: tuple[float, ...] = (0.9, 0.95),
    modes: tuple[str, ...] | None = None,
    seed: int | None = None,
    threads: int = 1,
    density_options: DensityOptions | None = None,
) -> CoverageReport:
    """Share of replications whose uniform region covers the truth."""
    if reps < 1:
        raise InvalidInputError("reps", reps, "must be at least 1")
    B = validate_draws(B)
    threads = validate_threads(threads)
    levels = tuple(validate_level(level, "level") for level in levels)
    seed = validate_seed(spec.seed if seed is None else seed)
    allowed = DENSITY_MODES if spec.engine == "density" else ARRAY_MODES
    if modes is None:
        modes = ("constant",) if spec.engine == "density" else ARRAY_MODES
    modes = tuple(modes)
    for mode in modes:
        if mode not in allowed:
            raise InvalidInputError("mode", mode, f"must be one of {', '.join(allowed)}")
    options = density_options or DensityOptions()

    started = time.perf_counter()
    if threads == 1:
        outcomes = [_replicate(spec, rep, B, levels, modes, seed, options) for rep in range(reps)]
    else:
        outcomes = Parallel(n_jobs=threads)(
            delayed(_replicate)(spec, rep, B, levels, modes, seed, options) for rep in range(reps)
        )
    coverage = {
        (level, mode): float(np.mean([hits[(level, mode)] for hits in outcomes]))
        for level in levels
        for mode in modes
    }
    elapsed = time.perf_counter() - started
    logger.info("Coverage experiment %s/%s: %d reps in %.1fs", spec.family, spec.base, reps, elapsed)
    return CoverageReport(
        design=spec,
        reps=reps,
        B=B,
        levels=levels,
        modes=modes,
        coverage=coverage,
        wall_time=elapsed,
        density_options=options if spec.engine == "density" else None,
    )
