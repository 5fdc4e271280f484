"""``fluidscore`` command line: validate, analyze and plot score files.

Exit codes:
    0  success
    2  the input does not parse (syntax or dynamics error), or bad usage
    3  the input file cannot be read
    4  an output file cannot be written
    5  invalid configuration
"""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import click

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .flow import FlowConfig, analyze
from .ingest import ScoreError, parse_score
from .plot import PlotSpec, emit_scatter_csv, emit_scatter_svg, render_png
from .report import render_report

EXIT_PARSE = 2
EXIT_READ = 3
EXIT_WRITE = 4
EXIT_CONFIG = 5

CONFIG_ENV = "FLUIDSCORE_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    window_size: int = 8
    turbulence_min_layers_with_spots: int = 2
    y_range: str = "auto"

    def __post_init__(self):
        for name in ("window_size", "turbulence_min_layers_with_spots"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 2:
                raise ConfigError(f"{name} must be an integer >= 2, got {value!r}")
        if self.y_range not in ("auto", "table6"):
            raise ConfigError(f"y_range must be 'auto' or 'table6', got {self.y_range!r}")

    def flow(self) -> FlowConfig:
        return FlowConfig(self.window_size, self.turbulence_min_layers_with_spots)


def load_config(path: Optional[str], **overrides) -> Config:
    """Merge the config file (explicit path, else $FLUIDSCORE_CONFIG) with flag overrides."""
    values: dict = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, "rb") as fh:
                values = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
        unknown = set(values) - set(Config.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**values)


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _config_or_exit(path, **overrides) -> Config:
    try:
        return load_config(path, **overrides)
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)


def _read_score(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        _fail(f"cannot read {path}: {getattr(exc, 'strerror', None) or exc}", EXIT_READ)
    try:
        return parse_score(text, source=path)
    except ScoreError as exc:
        _fail(f"{path}: {exc}", EXIT_PARSE)


def _write(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        _fail(f"cannot write {path}: {exc.strerror}", EXIT_WRITE)


_config_option = click.option("--config", "config_path", default=None,
                              help=f"TOML config file (default: ${CONFIG_ENV}).")
_window_option = click.option("--window", type=int, default=None, help="Ticks per classification window.")
_spot_option = click.option("--min-spot-layers", type=int, default=None,
                            help="Layers with spots needed for a turbulent window.")


@click.group()
def cli():
    """Laminar/turbulent flow analysis of chromatic layers in symbolic scores."""


@cli.command()
@click.argument("file")
def validate(file):
    """Check that FILE parses."""
    score = _read_score(file)
    click.echo(f"{file}: ok ({len(score.events)} events, {score.tick_count} ticks)", err=True)


@cli.command(name="analyze")
@click.argument("file")
@_window_option
@_spot_option
@_config_option
@click.option("--out", default=None, help="Write the JSON report here.")
def analyze_cmd(file, window, min_spot_layers, config_path, out):
    """Write the flow analysis of FILE as JSON."""
    config = _config_or_exit(config_path, window_size=window, turbulence_min_layers_with_spots=min_spot_layers)
    score = _read_score(file)
    text = render_report(analyze(score, config.flow()), asdict(config))
    if out is None:
        click.echo(text, nl=False)
    else:
        _write(Path(out), text.encode("utf-8"))
        click.echo(out)


@cli.command(name="plot")
@click.argument("file")
@click.option("--format", "formats", type=click.Choice(["svg", "csv", "png"]), multiple=True,
              help="Output format; repeat for several (default svg).")
@click.option("--y-range", type=click.Choice(["auto", "table6"]), default=None)
@click.option("--out", default=".", help="Output directory.")
@_window_option
@_spot_option
@_config_option
def plot_cmd(file, formats, y_range, out, window, min_spot_layers, config_path):
    """Render the scatter plot of FILE."""
    config = _config_or_exit(config_path, window_size=window, turbulence_min_layers_with_spots=min_spot_layers,
                             y_range=y_range)
    score = _read_score(file)
    analysis = analyze(score, config.flow())
    spec = PlotSpec(y_mode=config.y_range)
    stem = Path(file).stem
    out_dir = Path(out)
    for fmt in dict.fromkeys(formats or ("svg",)):
        target = out_dir / f"{stem}.{fmt}"
        if fmt == "svg":
            _write(target, emit_scatter_svg(score, analysis.pathlines, analysis.phases, spec))
        elif fmt == "csv":
            _write(target, emit_scatter_csv(score, analysis.pathlines, analysis.phases))
        else:
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                render_png(analysis, target, spec)
            except OSError as exc:
                _fail(f"cannot write {target}: {exc.strerror}", EXIT_WRITE)
        click.echo(str(target))


def main():
    cli()


if __name__ == "__main__":
    main()
