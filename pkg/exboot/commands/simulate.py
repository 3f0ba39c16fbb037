"""Command for Monte Carlo coverage experiments."""

from pathlib import Path

import typer
from rich.table import Table

from exboot import simgen
from exboot.commands.common import console, run_guarded
from exboot.commands.config import RunConfig, load_run_config
from exboot.exceptions import InvalidInputError
from exboot.reporting import coverage_frame, envelope, write_csv, write_json
from exboot.validation import parse_grid, validate_output_dir, validate_threads

PAPER_SCALE = 2500


def parse_list(text: str, cast, field: str) -> tuple:
    """Split a comma-separated option into a tuple of ``cast`` values."""
    try:
        return tuple(cast(part) for part in str(text).split(",") if part.strip())
    except ValueError as e:
        raise InvalidInputError(field, text, "expected a comma-separated list") from e


def design_from_config(config: RunConfig) -> simgen.DesignSpec:
    """Design spec from the simulate section."""
    options = config.simulate
    return simgen.DesignSpec(
        family=options.family,
        base=options.base,
        p=1 if options.family == "dyadic_density" else options.p,
        dims=parse_list(options.dims, int, "dims"),
        seed=config.run.seed,
    )


def show_coverage(report: simgen.CoverageReport) -> None:
    """Print coverage per level and mode."""
    table = Table(title=f"📊 Coverage: {report.design.family}/{report.design.base}")
    table.add_column("Level", style="cyan")
    table.add_column("Mode", style="cyan")
    table.add_column("Coverage", style="bold green")
    for row in report.rows():
        table.add_row(f"{row['level']:g}", row["mode"], f"{row['coverage']:.3f}")
    console.print(table)
    console.print(f"⏱️ {report.reps} replications in {report.wall_time:.1f}s", style="white")


def cmd_simulate(config: RunConfig, modes: tuple[str, ...] | None = None) -> list[Path]:
    """Run the coverage experiment and write coverage.csv and coverage.json."""
    out_dir = validate_output_dir(config.run.out)
    threads = validate_threads(config.run.threads)
    spec = design_from_config(config)
    options = config.simulate
    reps, B = (PAPER_SCALE, PAPER_SCALE) if options.paper_scale else (options.reps, config.bootstrap.B)
    grid = parse_grid(config.density.grid)
    density_options = simgen.DensityOptions(
        rule=config.density.rule,
        grid=(float(grid[0]), float(grid[-1]), int(grid.size)),
        kernel=config.density.kernel,
        a_known_one=config.density.a_known_one,
        undersmooth=config.density.undersmooth,
    )
    with console.status(f"Running {reps} replications..."):
        report = simgen.coverage_experiment(
            spec,
            reps=reps,
            B=B,
            levels=parse_list(options.levels, float, "levels"),
            modes=modes,
            threads=threads,
            density_options=density_options,
        )
    show_coverage(report)

    written = []
    if config.output.csv:
        written.append(write_csv(out_dir / "coverage.csv", coverage_frame(report)))
    if config.output.json:
        settings = config.reproducible_dict()
        settings["input_options"] = {"modes": list(report.modes)}
        payload = envelope("simulate", spec.engine, settings, spec.seed, report.to_dict())
        written.append(write_json(out_dir / "coverage.json", payload))
    return written


def simulate(
    family: str | None = typer.Option(None, "--family", help="separable_k2, separable_k3, dyadic or dyadic_density"),
    base: str | None = typer.Option(None, "--base", help="gaussian or mixture (logistic for density)"),
    p: int | None = typer.Option(None, "--p", help="Coordinate dimension"),
    dims: str | None = typer.Option(None, "--dims", help="Cluster sizes, e.g. 25,25"),
    reps: int | None = typer.Option(None, "--reps", help="Monte Carlo replications"),
    B: int | None = typer.Option(None, "--B", help="Bootstrap draws"),
    levels: str | None = typer.Option(None, "--levels", help="Nominal levels, e.g. 0.9,0.95"),
    mode: list[str] | None = typer.Option(None, "--mode", help="Band mode(s) to score; repeatable"),
    rule: str | None = typer.Option(None, "--rule", help="Bandwidth rule for density designs"),
    paper_scale: bool | None = typer.Option(
        None, "--paper-scale/--desk-scale", "--full-scale", help="2,500 reps x 2,500 draws"
    ),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: EXBOOT_SEED)"),
    threads: int | None = typer.Option(None, "--threads", help="Worker cap; results do not change"),
    out: str | None = typer.Option(None, "--out", help="📁 Output directory"),
    config_file: str | None = typer.Option(None, "--config", help="⚙️ exboot.toml to read"),
) -> None:
    """🎲 Coverage frequencies of uniform bands on simulated designs."""

    def body() -> list[Path]:
        config = load_run_config(config_file, "simulate").with_overrides(
            run={"seed": seed, "threads": threads, "out": out},
            bootstrap={"B": B},
            density={"rule": rule},
            simulate={
                "family": family,
                "base": base,
                "p": p,
                "dims": dims,
                "reps": reps,
                "levels": levels,
                "paper_scale": paper_scale,
            },
        )
        return cmd_simulate(config, modes=tuple(mode) if mode else None)

    run_guarded(body, out if out is not None else "exboot-out")
