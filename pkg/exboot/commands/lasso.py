"""Command for Lasso fits with a bootstrap-tuned penalty."""

from pathlib import Path

import typer
from rich.table import Table

from exboot import lasso as lasso_engine
from exboot.commands.common import console, first_line_columns, run_guarded
from exboot.commands.config import RunConfig, load_run_config
from exboot.exceptions import InvalidInputError
from exboot.reporting import coefficient_frame, envelope, lasso_summary, write_csv, write_json
from exboot.validation import validate_input_path, validate_output_dir, validate_threads


def show_fit(summary: dict) -> None:
    """Print the fit summary as a table."""
    table = Table(title="📊 Lasso fit")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="white")
    for key in ("lambda0", "lambda", "objective", "kkt_violation", "iterations", "converged"):
        table.add_row(key, str(summary[key]))
    table.add_row("active", ", ".join(summary["beta"]) or "none")
    console.print(table)


def cmd_lasso(config: RunConfig, K: int, re_sparsity: int | None = None) -> list[Path]:
    """Read ``i_1..i_K, y, x_1..x_p`` rows, tune the penalty, fit and report."""
    input_path = validate_input_path(config.input)
    out_dir = validate_output_dir(config.run.out)
    threads = validate_threads(config.run.threads)
    p = first_line_columns(input_path) - K - 1
    if p < 1:
        raise InvalidInputError("input", str(input_path), f"needs {K} index columns, y and at least one regressor")
    with open(input_path, encoding="utf-8") as stream:
        problem = lasso_engine.ClusteredRegression.from_csv(stream, K, p)

    with console.status("Tuning the penalty..."):
        fit, choice, _ = lasso_engine.fit(
            problem,
            eta=config.lasso.eta,
            c=config.lasso.c,
            B=config.bootstrap.B,
            seed=config.run.seed,
            threads=threads,
        )
    re_value = None
    if re_sparsity is not None:
        _, X = problem.flatten()
        re_value = lasso_engine.restricted_eigenvalue_diagnostic(X, re_sparsity, seed=config.run.seed)
    summary = lasso_summary(fit, choice, re_value)
    show_fit(summary)

    written = []
    if config.output.csv:
        written.append(write_csv(out_dir / "coefficients.csv", coefficient_frame(fit)))
    if config.output.json:
        settings = config.reproducible_dict()
        settings["input_options"] = {"K": K, "p": p, "re_sparsity": re_sparsity}
        written.append(write_json(out_dir / "fit.json", envelope("lasso", "lasso", settings, config.run.seed, summary)))
    return written


def lasso(
    input_path: str = typer.Argument(..., help="📄 CSV rows i_1..i_K, y, x_1..x_p"),
    K: int = typer.Option(2, "--K", help="Number of index columns"),
    eta: float | None = typer.Option(None, "--eta", help="Quantile level of the penalty"),
    c: float | None = typer.Option(None, "--c", help="Slack constant (> 1)"),
    B: int | None = typer.Option(None, "--B", help="Bootstrap draws"),
    re_diagnostic: int | None = typer.Option(None, "--re-diagnostic", help="Report a restricted-eigenvalue bound at this sparsity"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (default: EXBOOT_SEED)"),
    threads: int | None = typer.Option(None, "--threads", help="Worker cap; results do not change"),
    out: str | None = typer.Option(None, "--out", help="📁 Output directory"),
    config_file: str | None = typer.Option(None, "--config", help="⚙️ exboot.toml to read"),
    csv: bool | None = typer.Option(None, "--csv/--no-csv", help="Write coefficients.csv"),
    json: bool | None = typer.Option(None, "--json/--no-json", help="Write fit.json"),
) -> None:
    """🎯 Lasso with a multiplier-bootstrap penalty for multiway-clustered data."""

    def body() -> list[Path]:
        config = load_run_config(config_file, "lasso", input_path).with_overrides(
            run={"seed": seed, "threads": threads, "out": out},
            bootstrap={"B": B},
            lasso={"eta": eta, "c": c},
            output={"csv": csv, "json": json},
        )
        return cmd_lasso(config, K=K, re_sparsity=re_diagnostic)

    run_guarded(body, out if out is not None else "exboot-out")
