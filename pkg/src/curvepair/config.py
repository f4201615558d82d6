"""
Configuration Module

Environment settings and the per-run configuration shared by the CLI and the
HTTP front end. Settings are read from the process environment after loading an
optional ``.env`` file; command-line flags and request bodies override them.

Example Usage:
    settings = load_settings()
    configure_logging(settings.log_level)

    config = RunConfig(
        f_text="x^2 + y^2 - 4",
        g_text="(x-2)^2 + y^2 - 4",
        region=(-4, -4, 4, 4),
        max_depth=settings.max_depth
    )
    config.validate()
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import load_dotenv

from curvepair.errors import ConfigurationError


logger = logging.getLogger(__name__)


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
OUTPUT_FORMATS = ('json', 'svg', 'both')


def configure_logging(level: Any = logging.WARNING) -> None:
    """
    Configure root logging for an entry point.

    Args:
        level: Level name ('DEBUG', 'info', ...) or number
    """
    if isinstance(level, str):
        name = level.strip().upper()
        level = int(name) if name.isdigit() else logging.getLevelName(name)
        if not isinstance(level, int):
            raise ConfigurationError(f"Unknown log level: {name}", details={'variable': 'CURVEPAIR_LOG'})
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger('curvepair').setLevel(level)


def _int_setting(environ: Mapping[str, str], name: str, default: int, minimum: int = 0) -> int:
    raw = environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        error_msg = f"{name} must be an integer, got {raw!r}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg, details={'variable': name})
    if value < minimum:
        error_msg = f"{name} must be at least {minimum}, got {value}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg, details={'variable': name})
    return value


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults taken from the environment."""

    log_level: str = 'WARNING'
    max_depth: int = 24
    iteration_cap: int = 64
    oracle_grid_depth: int = 6
    oracle_split_cap: int = 12
    api_host: str = '0.0.0.0'
    api_port: int = 8000

    def to_dict(self) -> Dict[str, Any]:
        return {
            'log_level': self.log_level,
            'max_depth': self.max_depth,
            'iteration_cap': self.iteration_cap,
            'oracle_grid_depth': self.oracle_grid_depth,
            'oracle_split_cap': self.oracle_split_cap,
            'api_host': self.api_host,
            'api_port': self.api_port
        }


def load_settings(environ: Optional[Mapping[str, str]] = None, dotenv: bool = True) -> Settings:
    """
    Build Settings from CURVEPAIR_* variables.

    Args:
        environ: Mapping to read instead of os.environ (tests)
        dotenv: Load a .env file into os.environ first

    Raises:
        ConfigurationError: If a variable holds an invalid value
    """
    if environ is None:
        if dotenv:
            load_dotenv()
        environ = os.environ
    return Settings(
        log_level=environ.get('CURVEPAIR_LOG', 'WARNING') or 'WARNING',
        max_depth=_int_setting(environ, 'CURVEPAIR_MAX_DEPTH', 24, minimum=1),
        iteration_cap=_int_setting(environ, 'CURVEPAIR_ITERATION_CAP', 64, minimum=1),
        oracle_grid_depth=_int_setting(environ, 'CURVEPAIR_ORACLE_GRID_DEPTH', 6, minimum=1),
        oracle_split_cap=_int_setting(environ, 'CURVEPAIR_ORACLE_SPLIT_CAP', 12),
        api_host=environ.get('CURVEPAIR_API_HOST', '0.0.0.0') or '0.0.0.0',
        api_port=_int_setting(environ, 'CURVEPAIR_API_PORT', 8000, minimum=1)
    )


@dataclass
class RunConfig:
    """One pipeline run: the curves, the region and output options."""

    f_text: str
    g_text: str
    region: Tuple[int, int, int, int]
    max_depth: int = 24
    min_depth: int = 0
    format: str = 'json'
    emit_partition: bool = False
    output: Optional[str] = None
    iteration_cap: int = 64

    def validate(self) -> 'RunConfig':
        """
        Check the run invariants.

        Returns:
            self, so calls can be chained

        Raises:
            ConfigurationError: Listing every violated invariant
        """
        problems = []
        if not isinstance(self.f_text, str) or not self.f_text.strip():
            problems.append("f must be a non-empty polynomial string")
        if not isinstance(self.g_text, str) or not self.g_text.strip():
            problems.append("g must be a non-empty polynomial string")
        if len(self.region) != 4 or not all(isinstance(v, int) and not isinstance(v, bool) for v in self.region):
            problems.append(f"region must be four integers, got {list(self.region)}")
        else:
            x0, y0, x1, y1 = self.region
            if not x0 < x1:
                problems.append(f"region needs x0 < x1, got {x0} and {x1}")
            if not y0 < y1:
                problems.append(f"region needs y0 < y1, got {y0} and {y1}")
        if self.max_depth < 1:
            problems.append(f"max_depth must be at least 1, got {self.max_depth}")
        if not 0 <= self.min_depth <= self.max_depth:
            problems.append(f"min_depth must lie in [0, max_depth], got {self.min_depth}")
        if self.format not in OUTPUT_FORMATS:
            problems.append(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.format!r}")
        if self.iteration_cap < 1:
            problems.append(f"iteration_cap must be at least 1, got {self.iteration_cap}")

        if problems:
            error_msg = "; ".join(problems)
            logger.error(f"Invalid run configuration: {error_msg}")
            raise ConfigurationError(error_msg, details={'problems': problems})
        return self

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], settings: Optional[Settings] = None) -> 'RunConfig':
        """
        Build a RunConfig from a request body.

        Keys: f, g, region, max_depth, min_depth, format, emit_partition.

        Raises:
            ConfigurationError: If required keys are missing or mistyped
        """
        settings = settings or Settings()
        missing = [key for key in ('f', 'g', 'region') if key not in data]
        if missing:
            error_msg = f"Missing required fields: {', '.join(missing)}"
            logger.error(error_msg)
            raise ConfigurationError(error_msg, details={'missing': missing})
        try:
            region = tuple(data['region'])
            max_depth = int(data.get('max_depth', settings.max_depth))
            min_depth = int(data.get('min_depth', 0))
        except (TypeError, ValueError) as e:
            error_msg = f"Invalid numeric field: {str(e)}"
            logger.error(error_msg)
            raise ConfigurationError(error_msg) from e
        config = cls(
            f_text=data['f'],
            g_text=data['g'],
            region=region,
            max_depth=max_depth,
            min_depth=min_depth,
            format=data.get('format', 'json'),
            emit_partition=bool(data.get('emit_partition', False)),
            iteration_cap=settings.iteration_cap
        )
        return config.validate()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'f': self.f_text,
            'g': self.g_text,
            'region': list(self.region),
            'max_depth': self.max_depth,
            'min_depth': self.min_depth,
            'format': self.format,
            'emit_partition': self.emit_partition,
            'output': self.output
        }
