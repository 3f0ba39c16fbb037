"""Main exboot CLI application."""

from pathlib import Path

import typer
from rich.console import Console
from rich.text import Text

from exboot.commands import config, density_band, lasso, mean_band, simulate
from exboot.logging_setup import setup_logging

# Initialize rich console
console = Console()

app = typer.Typer(
    help="exboot: multiplier-bootstrap bands for exchangeable arrays.", name="exboot"
)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show debug logging"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only show errors"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Also log JSON lines to this file"),
) -> None:
    """Configure logging before any subcommand runs."""
    verbosity = "verbose" if verbose else "quiet" if quiet else "default"
    setup_logging(verbosity, log_file)


# Register commands
app.command(name="mean-band")(mean_band.mean_band)
app.command(name="density-band")(density_band.density_band)
app.command(name="simulate")(simulate.simulate)
app.command(name="lasso")(lasso.lasso)
app.command(name="config")(config.manage_config)


@app.command()
def version():
    """Show exboot version."""
    from exboot.version import get_version

    version = get_version()
    version_text = Text()
    version_text.append("📦 ", style="bold yellow")
    version_text.append("exboot ", style="bold cyan")
    version_text.append("version ", style="white")
    version_text.append(version, style="bold green")
    console.print(version_text)


if __name__ == "__main__":
    app()
