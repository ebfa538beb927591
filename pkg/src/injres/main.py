import logging
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler

from injres.config import (
    DEFAULT_FORMAT,
    DEFAULT_PRIME,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TORSION_BOUND,
    DEFAULT_WINDOW,
    REPORT_FORMATS,
)
from injres.errors import ConfigError
from injres.report import emit_report
from injres.utils import find_config, parse_window
from injres.verifier import SCENARIOS, Scenario, Status, run_scenario

log = logging.getLogger(__name__)

app = typer.Typer(help='Exact verifier for injective resolutions over Z[x]/(x^2).')
err_console = Console(stderr=True)

SCENARIO_ARGUMENT = typer.Argument(None, help=f'Scenarios to run: {", ".join(SCENARIOS)}.')
PRIME_OPTION = typer.Option(None, '--prime', help=f'The prime p (default {DEFAULT_PRIME}).')
WINDOW_OPTION = typer.Option(None, '--window', help='Degree window lo:hi.')
TORSION_BOUND_OPTION = typer.Option(None, '--torsion-bound')
SAMPLES_OPTION = typer.Option(None, '--samples', help='Random elements per degree.')
SEED_OPTION = typer.Option(None, '--seed')
FORMAT_OPTION = typer.Option(None, '--format', help='text or json.')
OUT_OPTION = typer.Option(None, '--out', help='Write the report here instead of stdout.')
CONFIG_OPTION = typer.Option(None, '--config', help='key = value defaults file.')
VERBOSE_OPTION = typer.Option(False, '--verbose', '-v')


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(message)s',
        datefmt='[%X]',
        handlers=[RichHandler(console=err_console, rich_tracebacks=True)],
        force=True,
    )


def _as_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f'{key} must be an integer, got {value!r}') from None


def resolve_settings(flags: dict[str, str | int | None], config: Path | None) -> dict:
    """Flags override the config file, which overrides the built-in defaults."""
    file_values = find_config(config)
    merged: dict[str, str | int | None] = {
        key: flags[key] if flags[key] is not None else file_values.get(key) for key in flags
    }
    settings = {
        'prime': DEFAULT_PRIME,
        'window': DEFAULT_WINDOW,
        'torsion_bound': DEFAULT_TORSION_BOUND,
        'samples': DEFAULT_SAMPLES,
        'seed': DEFAULT_SEED,
        'format': DEFAULT_FORMAT,
    }
    for key in ('prime', 'torsion-bound', 'samples', 'seed'):
        if merged[key] is not None:
            settings[key.replace('-', '_')] = _as_int(key, str(merged[key]))
    if merged['window'] is not None:
        settings['window'] = parse_window(str(merged['window']))
    if merged['format'] is not None:
        if merged['format'] not in REPORT_FORMATS:
            raise ConfigError(f'format must be one of {", ".join(REPORT_FORMATS)}')
        settings['format'] = merged['format']
    return settings


def report_path(out: Path, name: str, many: bool) -> Path:
    return out.with_name(f'{out.stem}-{name}{out.suffix}') if many else out


@app.callback()
def main() -> None:
    pass


@app.command()
def verify(
    scenarios: list[str] | None = SCENARIO_ARGUMENT,
    prime: int | None = PRIME_OPTION,
    window: str | None = WINDOW_OPTION,
    torsion_bound: int | None = TORSION_BOUND_OPTION,
    samples: int | None = SAMPLES_OPTION,
    seed: int | None = SEED_OPTION,
    fmt: str | None = FORMAT_OPTION,
    out: Path | None = OUT_OPTION,
    config: Path | None = CONFIG_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Run scenarios and report every check; exit 1 if any check fails."""
    setup_logging(verbose)
    if not scenarios:
        err_console.print('[bold red]Error:[/bold red] name at least one scenario')
        raise typer.Exit(code=2)
    try:
        settings = resolve_settings(
            {
                'prime': prime,
                'window': window,
                'torsion-bound': torsion_bound,
                'samples': samples,
                'seed': seed,
                'format': fmt,
            },
            config,
        )
        fmt = settings.pop('format')
        planned = [Scenario(name, **settings) for name in scenarios]
    except ConfigError as e:
        log.error('Configuration error: %s', e)
        err_console.print(f'[bold red]Error:[/bold red] {e}')
        raise typer.Exit(code=2) from None

    failed = False
    for s in planned:
        report = run_scenario(s)
        try:
            emit_report(report, fmt, out and report_path(out, s.name, len(planned) > 1))
        except ConfigError as e:
            err_console.print(f'[bold red]Error:[/bold red] {e}')
            raise typer.Exit(code=2) from None
        failed = failed or report.overall is Status.FAIL
    if failed:
        raise typer.Exit(code=1)


def run():
    """Entry point for the CLI command."""
    app()


if __name__ == '__main__':
    run()
