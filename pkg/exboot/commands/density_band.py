"""Command for uniform bands on the density of dyadic outcomes."""

import logging
from pathlib import Path

import numpy as np
import typer

from exboot import density
from exboot.arrays import DyadicArray, load_dyadic_edges
from exboot.commands.common import console, run_guarded
from exboot.commands.config import DensitySection, RunConfig, load_run_config
from exboot.exceptions import InvalidInputError
from exboot.reporting import density_frame, density_summary, envelope, write_csv, write_json, write_svg
from exboot.validation import (
    parse_grid,
    validate_input_path,
    validate_mode,
    validate_output_dir,
    validate_threads,
)

logger = logging.getLogger(__name__)

KERNEL_CHOICES = ("epanechnikov", "gaussian", "gaussian4")


def make_kernel(name: str) -> density.KernelSpec:
    """Kernel spec for a CLI kernel name."""
    name = validate_mode(name, KERNEL_CHOICES)
    if name == "gaussian4":
        kernel = density.KernelSpec.fourth_order_gaussian()
    else:
        kernel = density.KernelSpec(family=name)
    kernel.validate()
    return kernel


def log_transform(data: DyadicArray) -> DyadicArray:
    """Logarithm of the nonzero outcomes; zeros stay at the point mass."""
    values = np.array(data.values)
    nonzero = values != 0.0
    if np.any(values[nonzero] < 0.0):
        raise InvalidInputError("weights", "negative", "log transform needs non-negative flows")
    values[nonzero] = np.log(values[nonzero])
    return DyadicArray(values, symmetric=data.symmetric)


def design_grid(options: DensitySection, data: DyadicArray) -> np.ndarray:
    """Parse the grid; the default grid drops y = 0 when outcomes sit there."""
    grid = parse_grid(options.grid)
    if density.has_zero_outcomes(data) and np.any(grid == 0.0):
        if options.grid != DensitySection().grid:
            raise InvalidInputError("grid", options.grid, "contains 0, where the outcome has a point mass")
        logger.warning("Dropping the design point y = 0 from the default grid")
        grid = grid[grid != 0.0]
    return grid


def cmd_density_band(config: RunConfig, bandwidth: float | None = None) -> list[Path]:
    """Load edges, estimate the density, band it, write CSV, JSON and SVG."""
    input_path = validate_input_path(config.input)
    out_dir = validate_output_dir(config.run.out)
    options = config.density
    threads = validate_threads(config.run.threads)

    with open(input_path, encoding="utf-8") as stream:
        data, _ = load_dyadic_edges(stream, symmetrize=options.symmetrize)
    if options.log_transform:
        data = log_transform(data)
    grid = design_grid(options, data)
    kernel = make_kernel(options.kernel)
    h = bandwidth if bandwidth is not None else density.bandwidth(data, options.rule, options.undersmooth)

    with console.status(f"Bootstrapping density band over {grid.size} design points..."):
        result = density.density_band(
            data,
            grid,
            kernel,
            h,
            alpha=config.bootstrap.alpha,
            B=config.bootstrap.B,
            band=options.band,
            a_known_one=options.a_known_one,
            seed=config.run.seed,
            threads=threads,
        )

    written = []
    if config.output.csv:
        written.append(write_csv(out_dir / "density_band.csv", density_frame(result)))
    if config.output.json:
        settings = config.reproducible_dict()
        settings["input_options"] = {"bandwidth": bandwidth}
        payload = envelope("density-band", "density", settings, result.seed, density_summary(result))
        written.append(write_json(out_dir / "report.json", payload))
    if config.output.svg:
        written.append(write_svg(out_dir / "density_band.svg", result))
    return written


def density_band(
    input_path: str = typer.Argument(..., help="📄 Edge list: id_i,id_j,y"),
    grid: str | None = typer.Option(None, "--grid", help="Design points as lo:hi:count"),
    kernel: str | None = typer.Option(None, "--kernel", help="epanechnikov, gaussian or gaussian4"),
    rule: str | None = typer.Option(None, "--rule", help="Silverman rule a or b"),
    bandwidth: float | None = typer.Option(None, "--bandwidth", help="Fixed bandwidth h"),
    undersmooth: float | None = typer.Option(None, "--undersmooth", help="Extra rate exponent"),
    alpha: float | None = typer.Option(None, "--alpha", help="One minus the confidence level"),
    B: int | None = typer.Option(None, "--B", help="Bootstrap draws"),
    band: str | None = typer.Option(None, "--band", help="constant or studentized"),
    a_known_one: bool | None = typer.Option(None, "--a-known-one/--estimate-a", help="Set a_hat = 1"),
    log_transform_flag: bool | None = typer.Option(None, "--log-transform/--no-log-transform", help="Log of nonzero flows"),
    symmetrize: bool | None = typer.Option(None, "--symmetrize/--no-symmetrize", help="Sum both directions"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: EXBOOT_SEED)"),
    threads: int | None = typer.Option(None, "--threads", help="Worker cap; results do not change"),
    out: str | None = typer.Option(None, "--out", help="📁 Output directory"),
    config_file: str | None = typer.Option(None, "--config", help="⚙️ exboot.toml to read"),
    csv: bool | None = typer.Option(None, "--csv/--no-csv", help="Write density_band.csv"),
    json: bool | None = typer.Option(None, "--json/--no-json", help="Write report.json"),
    svg: bool | None = typer.Option(None, "--svg/--no-svg", help="Write density_band.svg"),
) -> None:
    """📈 Uniform confidence band for the density of dyadic outcomes."""

    def body() -> list[Path]:
        config = load_run_config(config_file, "density-band", input_path).with_overrides(
            run={"seed": seed, "threads": threads, "out": out},
            bootstrap={"B": B, "alpha": alpha},
            density={
                "grid": grid,
                "kernel": kernel,
                "rule": rule,
                "band": band,
                "a_known_one": a_known_one,
                "log_transform": log_transform_flag,
                "symmetrize": symmetrize,
                "undersmooth": undersmooth,
            },
            output={"csv": csv, "json": json, "svg": svg},
        )
        return cmd_density_band(config, bandwidth=bandwidth)

    run_guarded(body, out if out is not None else "exboot-out")
