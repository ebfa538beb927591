import json
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from rich.console import Console
from rich.table import Table

from injres.errors import ConfigError
from injres.utils import ensure_directory_exists
from injres.verifier import Report, Status

log = logging.getLogger(__name__)

STATUS_STYLES = {Status.PASS: 'green', Status.FAIL: 'bold red', Status.SKIPPED: 'yellow'}


def package_version() -> str:
    try:
        return version('injres')
    except PackageNotFoundError:
        return '0.0.0+unknown'


def report_dict(r: Report) -> dict:
    s = r.scenario
    return {
        'scenario': s.name,
        'prime': s.prime,
        'window': [s.window[0], s.window[1]],
        'checks': [
            {
                'name': c.name,
                'paperRef': c.claim,
                'status': str(c.status),
                'witness': c.witness,
                'elapsedMs': c.elapsed_ms,
            }
            for c in r.checks
        ],
        'overall': str(r.overall),
        'version': package_version(),
    }


def report_table(r: Report) -> Table:
    s = r.scenario
    table = Table(
        title=f'{s.name}  p={s.prime}  window={s.window[0]}:{s.window[1]}  seed={s.seed}',
        caption=f'overall: {r.overall}',
    )
    table.add_column('check')
    table.add_column('claim')
    table.add_column('status')
    table.add_column('witness', overflow='fold')
    table.add_column('ms', justify='right')
    for c in r.checks:
        style = STATUS_STYLES[c.status]
        table.add_row(
            c.name, c.claim, f'[{style}]{c.status}[/{style}]', c.witness or '', str(c.elapsed_ms)
        )
    return table


def emit_report(r: Report, fmt: str = 'text', out: Path | None = None) -> None:
    """Write one report as JSON or as a table, to `out` or to standard output."""
    if fmt not in ('text', 'json'):
        raise ConfigError(f'unknown report format {fmt!r}')
    if out is None:
        if fmt == 'json':
            sys.stdout.write(json.dumps(report_dict(r), indent=2) + '\n')
        else:
            Console().print(report_table(r))
        return

    try:
        ensure_directory_exists(out.parent)
        if fmt == 'json':
            out.write_text(json.dumps(report_dict(r), indent=2) + '\n', encoding='utf8')
        else:
            with out.open('w', encoding='utf8') as f:
                Console(file=f, width=160, color_system=None).print(report_table(r))
    except OSError as e:
        raise ConfigError(f'cannot write report to {out}: {e}') from e
    log.info('Wrote %s report to %s', fmt, out)
