import subprocess  # nosec B404

from funlog import log_calls
from rich import get_console, reconfigure
from rich import print as rprint

SRC_PATHS = ['src', 'tests', 'devtools']
DOC_PATHS = ['docs', 'README.md']

STEPS = [
    ['codespell', '--write-changes', *SRC_PATHS, *DOC_PATHS],
    ['ruff', 'check', '--fix', *SRC_PATHS],
    ['ruff', 'format', *SRC_PATHS],
    ['ty', 'check', 'src'],
    ['bandit', '-c', 'pyproject.toml', '-r', 'src', 'devtools'],
    ['pytest', '-q'],
]


reconfigure(emoji=not get_console().options.legacy_windows)


def main() -> int:
    rprint()
    errcount = sum(run(['uv', 'run', *step]) for step in STEPS)
    rprint()

    if errcount:
        rprint(f'[bold red]:x: {errcount} of {len(STEPS)} steps failed.[/bold red]')
    else:
        rprint('[bold green]:white_check_mark: All checks passed![/bold green]')
    rprint()
    return errcount


@log_calls(level='warning', show_timing_only=True)
def run(cmd: list[str]) -> int:
    rprint()
    rprint(f'[bold green]>> {" ".join(cmd)}[/bold green]')
    try:
        subprocess.run(cmd, text=True, check=True)  # nosec B603
    except KeyboardInterrupt:
        rprint('[yellow]Keyboard interrupt - Cancelled[/yellow]')
        return 1
    except subprocess.CalledProcessError as e:
        rprint(f'[bold red]Error: {e}[/bold red]')
        return 1
    return 0


if __name__ == '__main__':
    exit(main())
