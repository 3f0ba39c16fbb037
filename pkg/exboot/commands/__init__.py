"""exboot CLI commands package."""

from . import config, density_band, lasso, mean_band, simulate

__all__ = [
    "config",
    "density_band",
    "lasso",
    "mean_band",
    "simulate",
]
