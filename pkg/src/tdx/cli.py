"""Command-line interface for trial-design analyses."""

from __future__ import annotations

import logging
import os

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import typer
import yaml

from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table as RichTable

from tdx import __version__
from tdx.commands import build_report, density_report
from tdx.errors import ConfigError, TdxError
from tdx.reports import Report, print_report, render, write_report
from tdx.schema.config import (
    RddSimParams,
    RunConfig,
    config_error,
    load_run_config,
    parse_run_config,
)
from tdx.utils import parse_float_list

EXAMPLES_DIR = Path(__file__).parent / 'examples'
OUTPUT_DIR_ENV = 'TDX_OUTPUT_DIR'
LOG_LEVEL_ENV = 'TDX_LOG_LEVEL'

logger = logging.getLogger('tdx')

console = Console()
err_console = Console(stderr=True)

app = typer.Typer(
    add_completion=False,
    help='Trial-design analysis toolkit.',
    no_args_is_help=True,
)

ConfigOpt = Annotated[
    Path | None,
    typer.Option('--config', '-c', help='YAML run file (schema: 1).'),
]
SeedOpt = Annotated[
    int | None, typer.Option('--seed', help='Seed of the random stream.')
]
FormatOpt = Annotated[
    str | None,
    typer.Option('--format', '-f', help='table, csv or json.'),
]
OutputOpt = Annotated[
    Path | None,
    typer.Option(
        '--output',
        '-o',
        help=f'Output file; relative paths go under ${OUTPUT_DIR_ENV}.',
    ),
]
DrawsOpt = Annotated[
    int | None, typer.Option('--draws', help='Simulated draws.')
]
CapOpt = Annotated[
    int | None, typer.Option('--cap', help='Enumeration cap.')
]


def setup_logging(level: str) -> None:
    """Send log records to stderr through rich."""
    logging.basicConfig(
        level=level.upper(),
        format='%(message)s',
        datefmt='[%X]',
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@contextmanager
def exit_codes() -> Iterator[None]:
    """Turn tdx errors into their exit statuses."""
    try:
        yield
    except ValidationError as exc:
        _fail(config_error(exc))
    except TdxError as exc:
        _fail(exc)


def _fail(exc: TdxError) -> None:
    err_console.print(f'error: {exc}', style='red', markup=False)
    raise typer.Exit(code=exc.exit_code)


def _output_path(path: str) -> Path:
    out = Path(path)
    base = os.getenv(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def resolve_config(
    command: str,
    config: Path | None,
    params: dict[str, Any],
    seed: int | None = None,
    fmt: str | None = None,
    output: Path | None = None,
) -> RunConfig:
    """Merge a run file with command-line overrides.

    Flags left at ``None`` keep the value of the run file.
    """
    data: dict[str, Any] = {'schema': 1, 'command': command, 'params': {}}
    if config is not None:
        run = load_run_config(config)
        if run.command != command:
            raise ConfigError(
                'command', f'{config} is a {run.command} run file'
            )
        data = run.model_dump(by_alias=True)
    data['params'] = {
        **data['params'],
        **{k: v for k, v in params.items() if v is not None},
    }
    for key, value in (
        ('seed', seed),
        ('format', fmt),
        ('output_path', None if output is None else str(output)),
    ):
        if value is not None:
            data[key] = value
    return parse_run_config(data)


def emit(report: Report, run: RunConfig) -> None:
    """Write ``report`` to the configured file or to stdout."""
    if run.output_path is not None:
        path = write_report(report, run.format, _output_path(run.output_path))
        logger.info('wrote %s', path)
    elif run.format == 'table':
        print_report(report, console)
    else:
        typer.echo(render(report, run.format), nl=False)


def execute(run: RunConfig, emit_density: Path | None = None) -> None:
    """Compute and emit the report of ``run``."""
    report = build_report(run)
    emit(report, run)
    if emit_density is not None:
        params = run.command_params()
        if not isinstance(params, RddSimParams):
            raise ConfigError(
                'emit_density', f'not available for {run.command}'
            )
        path = write_report(
            density_report(params), 'csv', _output_path(str(emit_density))
        )
        logger.info('wrote %s', path)


@app.callback()
def main(
    log_level: Annotated[
        str | None,
        typer.Option(
            '--log-level', help=f'Log level (default ${LOG_LEVEL_ENV}).'
        ),
    ] = None,
) -> None:
    """Trial-design analysis toolkit."""
    load_dotenv()
    setup_logging(log_level or os.getenv(LOG_LEVEL_ENV, 'WARNING'))


@app.command('bounds')
def bounds(
    rj: Annotated[float | None, typer.Option('--rj')] = None,
    rk: Annotated[float | None, typer.Option('--rk')] = None,
    alpha: Annotated[float | None, typer.Option('--alpha')] = None,
    excluded: Annotated[float | None, typer.Option('--excluded')] = None,
    withdrawn: Annotated[float | None, typer.Option('--withdrawn')] = None,
    alpha_grid: Annotated[
        int | None,
        typer.Option('--alpha-grid', help='Points of the U/L alpha curve.'),
    ] = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Closed-form success-rate bounds."""
    with exit_codes():
        params = {
            'rj': rj,
            'rk': rk,
            'alpha': alpha,
            'excluded': excluded,
            'withdrawn': withdrawn,
            'alpha_grid': alpha_grid,
        }
        execute(resolve_config('bounds', config, params, None, fmt, output))


@app.command('oracle')
def oracle(
    n: Annotated[int | None, typer.Option('--n')] = None,
    rj: Annotated[float | None, typer.Option('--rj')] = None,
    rk: Annotated[float | None, typer.Option('--rk')] = None,
    alpha: Annotated[float | None, typer.Option('--alpha')] = None,
    cap: CapOpt = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Bounds by enumerating integer response tables."""
    with exit_codes():
        params = {'n': n, 'rj': rj, 'rk': rk, 'alpha': alpha, 'cap': cap}
        execute(resolve_config('oracle', config, params, None, fmt, output))


@app.command('transport')
def transport(
    n: Annotated[int | None, typer.Option('--n')] = None,
    p: Annotated[float | None, typer.Option('--p')] = None,
    qs: Annotated[
        str | None,
        typer.Option('--qs', help='Comma separated preference fractions.'),
    ] = None,
    n_star: Annotated[int | None, typer.Option('--n-star')] = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Randomized versus assign-the-opposites cell sizes."""
    with exit_codes():
        params = {
            'n': n,
            'p': p,
            'qs': _float_list('qs', qs),
            'n_star': n_star,
        }
        execute(
            resolve_config('transport', config, params, None, fmt, output)
        )


@app.command('td-sim')
def td_sim(
    draws: DrawsOpt = None,
    cap: CapOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Simulate a temporal-discontinuity design."""
    with exit_codes():
        params = {'draws': draws, 'cap': cap}
        execute(resolve_config('td-sim', config, params, seed, fmt, output))


@app.command('k-sweep')
def k_sweep(
    sigmas: Annotated[
        str | None,
        typer.Option('--sigmas', help='Comma separated dispersions.'),
    ] = None,
    draws: DrawsOpt = None,
    cap: CapOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Relate the design parameter K to the distance from randomization."""
    with exit_codes():
        params = {
            'sigmas': _float_list('sigmas', sigmas),
            'draws': draws,
            'cap': cap,
        }
        execute(
            resolve_config('k-sweep', config, params, seed, fmt, output)
        )


@app.command('rdd-sim')
def rdd_sim(
    n_pop: Annotated[int | None, typer.Option('--n-pop')] = None,
    emit_density: Annotated[
        Path | None,
        typer.Option(
            '--emit-density', help='CSV file for the latent density grid.'
        ),
    ] = None,
    density_z: Annotated[
        float | None,
        typer.Option('--density-z', help='Condition Z = z (default cutoff).'),
    ] = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Simulate a noise-induced discontinuity design."""
    with exit_codes():
        params = {'n_pop': n_pop, 'density_z': density_z}
        run = resolve_config('rdd-sim', config, params, seed, fmt, output)
        execute(run, emit_density)


@app.command('confounding')
def confounding(
    tolerance: Annotated[float | None, typer.Option('--tolerance')] = None,
    config: ConfigOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Check marginal and conditional no-confounding."""
    with exit_codes():
        params = {'tolerance': tolerance}
        execute(
            resolve_config('confounding', config, params, None, fmt, output)
        )


@app.command('run')
def run(
    config: ConfigOpt = None,
    example: Annotated[
        str | None,
        typer.Option('--example', '-e', help='Name of a bundled example.'),
    ] = None,
    seed: SeedOpt = None,
    fmt: FormatOpt = None,
    output: OutputOpt = None,
) -> None:
    """Run any run file or bundled example."""
    with exit_codes():
        if (config is None) == (example is None):
            raise ConfigError(
                'config', 'give exactly one of --config and --example'
            )
        path = config if config is not None else example_path(example or '')
        command = load_run_config(path).command
        execute(resolve_config(command, path, {}, seed, fmt, output))


def example_path(name: str) -> Path:
    """Return the run file of a bundled example."""
    path = EXAMPLES_DIR / f'{name}.yaml'
    if not path.is_file():
        known = ', '.join(
            sorted(p.stem for p in EXAMPLES_DIR.glob('*.yaml'))
        )
        raise ConfigError(
            'example', f'unknown example {name!r}; try {known}'
        )
    return path


@app.command('examples')
def examples() -> None:
    """List the bundled examples."""
    table = RichTable('example', 'command', 'seed')
    for path in sorted(EXAMPLES_DIR.glob('*.yaml')):
        data = yaml.safe_load(path.read_text(encoding='utf-8'))
        table.add_row(path.stem, data['command'], str(data.get('seed', 0)))
    console.print(table)


@app.command('version')
def version() -> None:
    """Print the package version."""
    typer.echo(__version__)


def _float_list(name: str, value: str | None) -> list[float] | None:
    if value is None:
        return None
    try:
        return parse_float_list(value)
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from exc


if __name__ == '__main__':  # pragma: no cover
    app()
