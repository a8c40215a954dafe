"""Process-wide numerical settings.

Values are resolved as defaults < JSON config file < environment < explicit
overrides (CLI flags or keyword arguments).
"""

import logging
import os
from typing import Any, Dict, NamedTuple, Optional

from .errors import InvalidParameters
from .utils import load_json_ordered

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 256
MIN_PRECISION = 64
DEFAULT_TERM_CAP = 10**7
DEFAULT_MAX_SWEEPS = 100

ENV_VARS = {
    "precision": "SOS_BOUNDS_PRECISION",
    "term_cap": "SOS_BOUNDS_TERM_CAP",
    "max_sweeps": "SOS_BOUNDS_MAX_SWEEPS",
    "seed": "SOS_BOUNDS_SEED",
}


class Settings(NamedTuple):
    precision: int = DEFAULT_PRECISION
    term_cap: int = DEFAULT_TERM_CAP
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    seed: int = 0


def _validated(settings: Settings) -> Settings:
    if settings.precision < MIN_PRECISION:
        raise InvalidParameters(
            f"precision must be at least {MIN_PRECISION} bits, got {settings.precision}"
        )
    if settings.term_cap < 1:
        raise InvalidParameters(f"term_cap must be positive, got {settings.term_cap}")
    if settings.max_sweeps < 1:
        raise InvalidParameters(
            f"max_sweeps must be positive, got {settings.max_sweeps}"
        )
    return settings


def load_settings(
    path: Optional[str] = None,
    environ: Optional[Dict[str, str]] = None,
    **overrides: Any,
) -> Settings:
    """Builds Settings from a JSON file, the environment and explicit overrides.

    Args:
        path: Optional path to a JSON file with any of the Settings fields.
        environ: Mapping used in place of os.environ (mainly for tests).
        overrides: Field values that win over everything else. None values are ignored.

    Returns:
        Settings: settings
    """
    values = Settings()._asdict()
    if path is not None:
        for key, value in load_json_ordered(path).items():
            if key not in values:
                raise InvalidParameters(f"Unknown setting {key!r} in {path}")
            values[key] = int(value)
    environ = os.environ if environ is None else environ
    for key, var in ENV_VARS.items():
        if var in environ:
            values[key] = int(environ[var])
    for key, value in overrides.items():
        if key not in values:
            raise InvalidParameters(f"Unknown setting {key!r}")
        if value is not None:
            values[key] = int(value)
    settings = _validated(Settings(**values))
    logger.debug("Resolved settings: %s", settings)
    return settings


_settings = load_settings()


def get_settings() -> Settings:
    return _settings


def set_settings(settings: Settings) -> Settings:
    """Installs ``settings`` process-wide and returns the previous value."""
    global _settings
    previous = _settings
    _settings = _validated(settings)
    return previous


def resolve_precision(prec: Optional[int] = None) -> int:
    if prec is None:
        return _settings.precision
    if prec < MIN_PRECISION:
        raise InvalidParameters(
            f"precision must be at least {MIN_PRECISION} bits, got {prec}"
        )
    return int(prec)


def resolve_term_cap(term_cap: Optional[int] = None) -> int:
    return _settings.term_cap if term_cap is None else int(term_cap)
