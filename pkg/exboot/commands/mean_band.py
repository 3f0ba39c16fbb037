"""Command for uniform confidence bands on the mean of an exchangeable array."""

from pathlib import Path

import typer

from exboot import joint, separable
from exboot.arrays import load_dyadic_edges, load_multiway_csv
from exboot.commands.common import console, first_line_columns, has_diagonal_rows, run_guarded
from exboot.commands.config import RunConfig, load_run_config
from exboot.exceptions import InvalidInputError
from exboot.multiplier import confidence_band
from exboot.reporting import band_frame, bootstrap_summary, envelope, write_csv, write_json
from exboot.validation import (
    validate_input_path,
    validate_level,
    validate_mode,
    validate_output_dir,
    validate_threads,
)

ENGINES = ("auto", "separable", "joint")


def resolve_engine(requested: str, K: int | None, columns: int, diagonal: bool = False) -> str:
    """Pick the engine for ``--engine auto``.

    ``--K`` means multiway. A three-column file is an edge list unless some row
    repeats its unit, which only a multiway grid can do.
    """
    requested = validate_mode(requested, ENGINES)
    if requested != "auto":
        return requested
    if K is not None:
        return "separable"
    return "joint" if columns == 3 and not diagonal else "separable"


def cmd_mean_band(
    config: RunConfig,
    K: int | None = None,
    p: int | None = None,
    symmetrize: bool = False,
) -> list[Path]:
    """Load the array, bootstrap, and write band.csv and report.json."""
    input_path = validate_input_path(config.input)
    out_dir = validate_output_dir(config.run.out)
    options = config.bootstrap
    alpha = validate_level(options.alpha)
    threads = validate_threads(config.run.threads)
    columns = first_line_columns(input_path)
    engine = resolve_engine(options.engine, K, columns, columns == 3 and has_diagonal_rows(input_path))

    with open(input_path, encoding="utf-8") as stream:
        if engine == "separable":
            K = 2 if K is None else K
            p = columns - K if p is None else p
            if p < 1:
                raise InvalidInputError("p", p, f"input has {columns} columns for K={K}")
            array = load_multiway_csv(stream, K, p)
            module = separable
        else:
            array, _ = load_dyadic_edges(stream, symmetrize=symmetrize)
            module = joint

    with console.status(f"Running {engine} bootstrap with B={options.B}..."):
        result = module.bootstrap(
            array,
            B=options.B,
            alpha=alpha,
            mode=options.mode,
            seed=config.run.seed,
            threads=threads,
            bessel=options.bessel,
        )
    band = confidence_band(result)

    written = []
    if config.output.csv:
        written.append(write_csv(out_dir / "band.csv", band_frame(band, result.sigma_tilde)))
    if config.output.json:
        settings = config.reproducible_dict()
        settings["input_options"] = {"engine": engine, "K": K, "p": p, "symmetrize": symmetrize}
        payload = envelope(
            "mean-band",
            engine,
            settings,
            result.seed,
            bootstrap_summary(result, band, include_draws=config.output.draws),
        )
        written.append(write_json(out_dir / "report.json", payload))
    return written


def mean_band(
    input_path: str = typer.Argument(..., help="📄 Multiway CSV or edge list"),
    engine: str | None = typer.Option(None, "--engine", help="auto, separable or joint"),
    K: int | None = typer.Option(None, "--K", help="Number of index columns (multiway input)"),
    p: int | None = typer.Option(None, "--p", help="Number of value columns (multiway input)"),
    B: int | None = typer.Option(None, "--B", help="Bootstrap draws"),
    alpha: float | None = typer.Option(None, "--alpha", help="One minus the confidence level"),
    mode: str | None = typer.Option(None, "--mode", help="raw (constant width) or studentized"),
    bessel: bool | None = typer.Option(None, "--bessel/--no-bessel", help="Bessel-corrected scale"),
    symmetrize: bool = typer.Option(False, "--symmetrize", help="Sum both directions of each edge"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: EXBOOT_SEED)"),
    threads: int | None = typer.Option(None, "--threads", help="Worker cap; results do not change"),
    out: str | None = typer.Option(None, "--out", help="📁 Output directory"),
    config_file: str | None = typer.Option(None, "--config", help="⚙️ exboot.toml to read"),
    csv: bool | None = typer.Option(None, "--csv/--no-csv", help="Write band.csv"),
    json: bool | None = typer.Option(None, "--json/--no-json", help="Write report.json"),
    draws: bool | None = typer.Option(None, "--draws/--no-draws", help="Embed draws in the JSON"),
) -> None:
    """📏 Uniform confidence band for the mean of an exchangeable array."""
    def body() -> list[Path]:
        config = load_run_config(config_file, "mean-band", input_path).with_overrides(
            run={"seed": seed, "threads": threads, "out": out},
            bootstrap={"B": B, "alpha": alpha, "mode": mode, "bessel": bessel, "engine": engine},
            output={"csv": csv, "json": json, "draws": draws},
        )
        return cmd_mean_band(config, K=K, p=p, symmetrize=symmetrize)

    run_guarded(body, out if out is not None else "exboot-out")
