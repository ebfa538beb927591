import logging
import os
import random
from pathlib import Path

from injres.config import CONFIG_DIR_NAME, CONFIG_FILE_NAME
from injres.errors import ConfigError

log = logging.getLogger(__name__)

CONFIG_KEYS = ('prime', 'window', 'torsion-bound', 'samples', 'seed', 'format')


def get_user_config_directory() -> Path:
    if os.name == 'nt':
        appdata = os.getenv('LOCALAPPDATA')
        if appdata:
            return Path(appdata)
        appdata = os.getenv('APPDATA')
        if appdata:
            return Path(appdata)
        return Path.home()

    xdg_config_home = os.getenv('XDG_CONFIG_HOME')
    if xdg_config_home:
        return Path(xdg_config_home)
    return Path.home() / '.config'


def default_config_path() -> Path:
    return get_user_config_directory() / CONFIG_DIR_NAME / CONFIG_FILE_NAME


def load_config_file(path: Path) -> dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment."""
    try:
        text = path.read_text(encoding='utf8')
    except OSError as e:
        raise ConfigError(f'cannot read config file {path}: {e}') from e

    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f'{path}:{lineno}: expected `key = value`')
        if key not in CONFIG_KEYS:
            raise ConfigError(f'{path}:{lineno}: unknown key {key!r}')
        values[key] = value
    log.debug('Loaded %d settings from %s', len(values), path)
    return values


def find_config(explicit: Path | None) -> dict[str, str]:
    if explicit is not None:
        return load_config_file(explicit)
    path = default_config_path()
    if path.is_file():
        return load_config_file(path)
    return {}


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(':')
    try:
        window = int(lo), int(hi)
    except ValueError:
        raise ConfigError(f'window must look like lo:hi, got {text!r}') from None
    if not sep or window[0] > window[1]:
        raise ConfigError(f'window must be a nonempty range lo:hi, got {text!r}')
    return window


def derive_rng(seed: int, name: str) -> random.Random:
    """Independent generator per check, so checks replay in isolation."""
    return random.Random(f'{seed}:{name}')  # nosec B311


def ensure_directory_exists(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
