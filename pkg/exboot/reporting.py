"""JSON, CSV and SVG emission.

JSON floats use Python's shortest round-trip repr; CSV tables use ``%.17g``.
Reports carry no timestamps, so equal inputs give byte-identical files.
"""

import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
from jinja2 import Environment, PackageLoader, select_autoescape

from exboot.density import DensityBandResult
from exboot.lasso import LassoFit, PenaltyChoice
from exboot.multiplier import BandResult, BootstrapResult
from exboot.simgen import CoverageReport
from exboot.version import get_version

FLOAT_FORMAT = "%.17g"


def to_jsonable(value):
    """Convert numpy and dataclass values into plain JSON types."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(payload: dict) -> str:
    """Indented JSON with repr floats and a trailing newline."""
    return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"


def write_json(path: Path, payload: dict) -> Path:
    """Write ``payload`` as JSON and return the path."""
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def envelope(command: str, engine: str, config: dict, seed: int, result: dict) -> dict:
    """Common report header around a command result."""
    return {
        "tool": "exboot",
        "version": get_version(),
        "command": command,
        "engine": engine,
        "seed": seed,
        "config": config,
        "result": result,
    }


def bootstrap_summary(result: BootstrapResult, band: BandResult, include_draws: bool = False) -> dict:
    """JSON body of a mean band."""
    summary = {
        "engine": result.engine,
        "estimate": result.estimate,
        "sigma_hat": result.sigma_hat,
        "sigma_tilde": result.sigma_tilde,
        "cv": result.cv,
        "alpha": result.alpha,
        "mode": result.mode,
        "bessel": result.bessel,
        "n": result.n,
        "B": result.B,
        "half_width": band.half_width,
        "lower": band.lower,
        "upper": band.upper,
    }
    if include_draws:
        summary["draws"] = result.draws
    return summary


def band_frame(band: BandResult, sigma_tilde: np.ndarray) -> pd.DataFrame:
    """One CSV row per coordinate."""
    return pd.DataFrame(
        {
            "coordinate": np.arange(1, band.estimate.size + 1),
            "estimate": band.estimate,
            "sigma_tilde": np.sqrt(sigma_tilde),
            "half_width": band.half_width,
            "lower": band.lower,
            "upper": band.upper,
        }
    )


def density_summary(result: DensityBandResult) -> dict:
    """JSON body of a density band."""
    return {
        "grid": result.grid,
        "a_hat": result.a_hat,
        "a_known_one": result.a_known_one,
        "h": result.h,
        "n": result.n,
        "alpha": result.alpha,
        "B": result.B,
        "band": result.band,
        "cv_raw": result.cv_raw,
        "cv_stud": result.cv_stud,
        "b_hat": result.b_hat,
        "f_hat": result.f_hat,
        "sigma_tilde": result.sigma_tilde,
        "lower": result.lower,
        "upper": result.upper,
    }


def density_frame(result: DensityBandResult) -> pd.DataFrame:
    """One CSV row per grid point."""
    return pd.DataFrame(
        {
            "y": result.grid,
            "f_hat": result.f_hat,
            "lower": result.lower,
            "upper": result.upper,
            "sigma_tilde": result.sigma_tilde,
        }
    )


def coverage_frame(report: CoverageReport) -> pd.DataFrame:
    """One CSV row per level and mode."""
    return pd.DataFrame(report.rows())


def lasso_summary(fit: LassoFit, choice: PenaltyChoice, re_value: float | None = None) -> dict:
    """JSON body of a Lasso fit; only nonzero coefficients are listed."""
    summary = {
        "beta": {str(j + 1): float(fit.beta[j]) for j in fit.active_set},
        "p": int(fit.beta.size),
        "lambda": fit.lam,
        "lambda0": choice.lambda0,
        "eta": choice.eta,
        "c": choice.c,
        "objective": fit.objective,
        "kkt_violation": fit.kkt_violation,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
    if re_value is not None:
        summary["restricted_eigenvalue"] = re_value
    return summary


def coefficient_frame(fit: LassoFit) -> pd.DataFrame:
    """One CSV row per coefficient."""
    return pd.DataFrame(
        {
            "coefficient": np.arange(1, fit.beta.size + 1),
            "beta": fit.beta,
            "active": fit.beta != 0.0,
        }
    )


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    """Write ``frame`` with the shared float format."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


class SvgFigure:
    """Pixel geometry for a band plot."""

    width = 720
    height = 420
    margin = (60, 30, 30, 50)  # left, right, top, bottom

    def __init__(self, x: np.ndarray, lower: np.ndarray, upper: np.ndarray, estimate: np.ndarray):
        self.x0, self.x1 = float(x.min()), float(x.max())
        low = min(float(lower.min()), 0.0)
        high = float(upper.max())
        pad = 0.05 * (high - low) if high > low else 1.0
        self.y0, self.y1 = low, high + pad
        self.x, self.lower, self.upper, self.estimate = x, lower, upper, estimate

    def px(self, value: float) -> float:
        left, right, _, _ = self.margin
        span = self.x1 - self.x0 or 1.0
        return left + (value - self.x0) / span * (self.width - left - right)

    def py(self, value: float) -> float:
        _, _, top, bottom = self.margin
        return top + (self.y1 - value) / (self.y1 - self.y0) * (self.height - top - bottom)

    def polyline(self, values: np.ndarray) -> str:
        return " ".join(f"{self.px(a):.2f},{self.py(b):.2f}" for a, b in zip(self.x, values, strict=True))

    def band_polygon(self) -> str:
        forward = self.polyline(self.upper)
        backward = " ".join(
            f"{self.px(a):.2f},{self.py(b):.2f}" for a, b in zip(self.x[::-1], self.lower[::-1], strict=True)
        )
        return f"{forward} {backward}"

    def ticks(self, low: float, high: float, count: int = 5) -> list[float]:
        if high <= low:
            return [low]
        step = _nice_step((high - low) / count)
        start = math.ceil(low / step) * step
        return [round(start + k * step, 10) for k in range(int((high - start) / step + 1e-9) + 1)]


def _nice_step(raw: float) -> float:
    magnitude = 10 ** math.floor(math.log10(raw))
    for factor in (1, 2, 2.5, 5, 10):
        if raw <= factor * magnitude:
            return factor * magnitude
    return 10 * magnitude


def render_density_svg(result: DensityBandResult, title: str = "Density with uniform band") -> str:
    """Render the density band through the SVG template."""
    figure = SvgFigure(result.grid, result.lower, result.upper, result.f_hat)
    env = Environment(
        loader=PackageLoader("exboot", "templates"),
        autoescape=select_autoescape(["svg", "xml", "jinja2"]),
        keep_trailing_newline=True,
    )
    template = env.get_template("density_band.svg.jinja2")
    return template.render(
        figure=figure,
        title=title,
        band_points=figure.band_polygon(),
        estimate_points=figure.polyline(result.f_hat),
        x_ticks=[(figure.px(t), t) for t in figure.ticks(figure.x0, figure.x1)],
        y_ticks=[(figure.py(t), t) for t in figure.ticks(figure.y0, figure.y1)],
        a_hat=result.a_hat,
        level=1.0 - result.alpha,
        band=result.band,
    )


def write_svg(path: Path, result: DensityBandResult) -> Path:
    """Write the density SVG and return the path."""
    path.write_text(render_density_svg(result), encoding="utf-8")
    return path
