"""
Environment configuration.
Infrastructure layer - reads process settings from the environment.
"""
import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

from src.domain.errors import ConfigurationError

_TRUE_VALUES = {"1", "true", "yes", "on"}
_FALSE_VALUES = {"0", "false", "no", "off"}


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    value = raw.strip().lower()
    if value in _TRUE_VALUES:
        return True
    if value in _FALSE_VALUES:
        return False
    raise ConfigurationError(f"{name} must be a boolean, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}")


@dataclass
class EngineSettings:
    """Process-wide settings, read from R2OMC_* environment variables."""
    output_dir: str = field(default_factory=lambda: os.getenv("R2OMC_OUTPUT_DIR", "results"))
    oracle_cache: str = field(default_factory=lambda: os.getenv("R2OMC_ORACLE_CACHE", ".oracle_cache"))
    workers: int = field(default_factory=lambda: _env_int("R2OMC_WORKERS", 1))
    log_level: str = field(default_factory=lambda: os.getenv("R2OMC_LOG_LEVEL", "INFO").upper())
    record_runtime: bool = field(default_factory=lambda: _env_bool("R2OMC_RECORD_RUNTIME", True))
    api_port: int = field(default_factory=lambda: _env_int("R2OMC_API_PORT", 8001))

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigurationError("R2OMC_WORKERS must be at least 1")
        if self.log_level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ConfigurationError(f"Unknown log level {self.log_level!r}")

    @classmethod
    def from_environment(cls, dotenv: bool = True) -> "EngineSettings":
        if dotenv:
            load_dotenv()
        return cls()
