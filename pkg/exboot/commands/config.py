"""Run configuration: defaults, exboot.toml files and the config command."""

try:
    import tomllib
except ImportError:
    # Fallback for Python < 3.11
    import tomli as tomllib

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli_w
import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from rich.text import Text

from exboot.exceptions import ConfigurationError, ExbootError

# Initialize rich console
console = Console()

CONFIG_FILENAME = "exboot.toml"
FALLBACK_SEED = 20240101


def default_seed() -> int:
    """Seed from EXBOOT_SEED, else a fixed fallback."""
    value = os.environ.get("EXBOOT_SEED")
    if value is None or not value.strip():
        return FALLBACK_SEED
    try:
        return int(value)
    except ValueError as e:
        raise ConfigurationError("EXBOOT_SEED", f"'{value}' is not an integer") from e


@dataclass(frozen=True)
class RunSection:
    """Seed, thread count and output directory."""

    seed: int = field(default_factory=default_seed)
    threads: int = 1
    out: str = "exboot-out"


@dataclass(frozen=True)
class BootstrapSection:
    B: int = 500
    alpha: float = 0.1
    mode: str = "studentized"
    bessel: bool = True
    engine: str = "auto"


@dataclass(frozen=True)
class DensitySection:
    grid: str = "-2:2:201"
    kernel: str = "epanechnikov"
    rule: str = "a"
    band: str = "constant"
    a_known_one: bool = False
    log_transform: bool = False
    symmetrize: bool = True
    undersmooth: float = 0.2


@dataclass(frozen=True)
class LassoSection:
    eta: float = 0.1
    c: float = 1.1


@dataclass(frozen=True)
class SimulateSection:
    family: str = "separable_k2"
    base: str = "mixture"
    p: int = 25
    dims: str = "25,25"
    reps: int = 500
    levels: str = "0.9,0.95"
    paper_scale: bool = False


@dataclass(frozen=True)
class OutputSection:
    csv: bool = True
    json: bool = True
    svg: bool = True
    draws: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Every option of every subcommand, grouped as in exboot.toml."""

    command: str = ""
    input: str = ""
    run: RunSection = field(default_factory=RunSection)
    bootstrap: BootstrapSection = field(default_factory=BootstrapSection)
    density: DensitySection = field(default_factory=DensitySection)
    lasso: LassoSection = field(default_factory=LassoSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    output: OutputSection = field(default_factory=OutputSection)

    def sections(self) -> dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("command", "input")}

    def to_dict(self) -> dict:
        return asdict(self)

    def reproducible_dict(self) -> dict:
        """Everything that can change a result; worker count and output location cannot."""
        data = asdict(self)
        data["run"].pop("threads")
        data["run"].pop("out")
        return data

    def with_overrides(self, **sections: dict) -> "RunConfig":
        """Apply flag values; ``None`` means the flag was not given."""
        updated = {}
        for name, values in sections.items():
            given = {k: v for k, v in values.items() if v is not None}
            if given:
                updated[name] = replace(getattr(self, name), **given)
        return replace(self, **updated)


def _check_section(path: Path, name: str, section_cls, values: dict):
    known = {f.name: f for f in fields(section_cls)}
    for key, value in values.items():
        if key not in known:
            raise ConfigurationError(str(path), f"unknown key '{name}.{key}'")
        default = getattr(section_cls(), key)
        if isinstance(default, bool) != isinstance(value, bool):
            raise ConfigurationError(str(path), f"'{name}.{key}' must be {type(default).__name__}")
        if isinstance(default, float) and isinstance(value, int):
            value = float(value)
        if not isinstance(value, type(default)):
            raise ConfigurationError(str(path), f"'{name}.{key}' must be {type(default).__name__}")
        values[key] = value
    return section_cls(**values)


def read_config_file(path: Path) -> RunConfig:
    """Parse an exboot.toml into a RunConfig."""
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(str(path), str(e)) from e
    base = RunConfig()
    sections = {}
    for name, values in data.items():
        if name not in base.sections():
            raise ConfigurationError(str(path), f"unknown section [{name}]")
        if not isinstance(values, dict):
            raise ConfigurationError(str(path), f"[{name}] must be a table")
        sections[name] = _check_section(path, name, type(getattr(base, name)), dict(values))
    return replace(base, **sections)


def load_run_config(path: str | Path | None = None, command: str = "", input_path: str = "") -> RunConfig:
    """Defaults, then ``path`` (or ./exboot.toml when present)."""
    if path is None and Path(CONFIG_FILENAME).is_file():
        path = CONFIG_FILENAME
    config = RunConfig() if path is None else read_config_file(Path(path))
    return replace(config, command=command, input=str(input_path))


def write_config_file(path: Path, config: RunConfig | None = None) -> Path:
    """Dump ``config`` (defaults when omitted) as TOML."""
    config = config or RunConfig()
    payload = {name: asdict(section) for name, section in config.sections().items()}
    with open(path, "wb") as f:
        tomli_w.dump(payload, f)
    return path


def manage_config(
    action: str = typer.Argument("show", help="Action to perform: show, create, or validate"),
    path: str = typer.Option(CONFIG_FILENAME, help="📁 Path to the configuration file"),
) -> None:
    """⚙️ Manage the exboot run configuration file."""
    config_path = Path(path)

    if action == "show":
        show_config(config_path)
    elif action == "create":
        create_config(config_path)
    elif action == "validate":
        validate_config(config_path)
    else:
        error_text = Text(
            f"❌ Error: Unknown action '{action}'. Use: show, create, or validate",
            style="bold red",
        )
        console.print(error_text)
        raise typer.Exit(code=2)


def show_config(config_path: Path) -> None:
    """Show the effective configuration, section by section."""
    if config_path.exists():
        try:
            config = read_config_file(config_path)
        except ExbootError as e:
            console.print(Text(f"❌ {e.message}", style="bold red"))
            raise typer.Exit(code=e.exit_code) from e
        console.print(f"📋 Configuration from: {config_path}", style="bold green")
    else:
        config = RunConfig()
        console.print("📋 No configuration file found, showing defaults.", style="yellow")
        console.print(f"💡 Use 'exboot config create --path {config_path}' to write one.", style="yellow")

    for name, section in config.sections().items():
        table = Table(title=escape(f"[{name}]"))
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="white")
        for key, value in asdict(section).items():
            table.add_row(key, str(value))
        console.print(table)


def create_config(config_path: Path) -> None:
    """Write a configuration file holding every default."""
    if config_path.exists():
        console.print(f"⚠️ Configuration already exists at {config_path}", style="yellow")
        console.print("💡 Remove it first or edit it in place.", style="yellow")
        return
    write_config_file(config_path)
    console.print(f"✅ Created configuration file: {config_path}", style="bold green")


def validate_config(config_path: Path) -> None:
    """Check a configuration file for unknown keys and wrong types."""
    if not config_path.exists():
        console.print(Text(f"❌ Configuration file not found: {config_path}", style="bold red"))
        raise typer.Exit(code=2)
    try:
        read_config_file(config_path)
    except ExbootError as e:
        console.print(Text(f"❌ {e.message}", style="bold red"))
        if e.suggestion:
            console.print(f"💡 {e.suggestion}", style="yellow")
        raise typer.Exit(code=e.exit_code) from e
    console.print("✅ Configuration is valid.", style="bold green")
