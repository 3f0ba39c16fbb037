"""Helpers shared by the analysis commands: error reporting and artifact listing."""

from collections.abc import Callable
from pathlib import Path

import pandas as pd
import typer
from rich.console import Console
from rich.text import Text

from exboot.exceptions import ExbootError
from exboot.reporting import write_json

# Initialize rich console
console = Console()


def report_error(error: ExbootError, out_dir: str | Path | None) -> None:
    """Print the error and drop error.json next to where artifacts would go."""
    error_text = Text()
    error_text.append("❌ ", style="bold red")
    error_text.append("Error: ", style="bold red")
    error_text.append(error.message, style="white")
    console.print(error_text)
    if error.suggestion:
        console.print(f"💡 {error.suggestion}", style="yellow")
    if out_dir is None:
        return
    try:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        write_json(path / "error.json", error.to_dict())
    except OSError:
        pass


def run_guarded(action: Callable[[], list[Path]], out_dir: str | Path | None) -> list[Path]:
    """Run a command body, mapping exboot errors to their exit codes."""
    try:
        written = action()
    except ExbootError as e:
        report_error(e, out_dir)
        raise typer.Exit(code=e.exit_code) from e
    for path in written:
        success_text = Text()
        success_text.append("✅ ", style="bold green")
        success_text.append("Wrote ", style="white")
        success_text.append(str(path), style="bold cyan")
        console.print(success_text)
    return written


def first_line_columns(path: Path) -> int:
    """Number of comma-separated fields on the first nonblank line."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                return len(line.split(","))
    return 0


def has_diagonal_rows(path: Path) -> bool:
    """Whether any row repeats its first field in the second, like a multiway cell ``(1, 1)``."""
    try:
        frame = pd.read_csv(path, header=None, usecols=[0, 1], dtype=str, skipinitialspace=True)
    except ValueError:
        return False
    first, second = frame[0].str.strip(), frame[1].str.strip()
    return bool((first == second).any())
