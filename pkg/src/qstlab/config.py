"""
Runtime Configuration

Settings come from environment variables, optionally seeded from a ``.env``
file in the working directory. A single cached ``Settings`` instance is shared
by the whole process.
"""

import logging
import os
from typing import Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

# Numeric tolerances shared by every module
PSD_TOLERANCE = 1e-9
EIGENVALUE_CLAMP = 1e-15
NORM_TOLERANCE = 1e-9

DEFAULT_SEED = 20140101


class Settings(BaseModel):
    """
    Process-wide toolkit settings.

    Caps are enforced before any dense allocation so oversize requests fail
    fast instead of exhausting memory.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Upper bound on worker threads for data-parallel loops",
    )
    dense_cap: int = Field(
        default=10,
        ge=1,
        le=14,
        description="Largest qubit count for dense matrices and density work",
    )
    transform_cap: int = Field(
        default=28,
        ge=2,
        le=32,
        description="Largest 2n for the Walsh-Hadamard bias transform",
    )
    default_seed: int = Field(
        default=DEFAULT_SEED,
        ge=0,
        description="Seed used when a command is given none",
    )
    log_level: str = Field(
        default="WARNING",
        description="Root log level used by the command-line interface",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from ``QSTLAB_*`` environment variables."""
        load_dotenv(find_dotenv(usecwd=True), override=False)
        values = {}
        env_map = {
            "threads": "QSTLAB_THREADS",
            "dense_cap": "QSTLAB_DENSE_CAP",
            "transform_cap": "QSTLAB_TRANSFORM_CAP",
            "default_seed": "QSTLAB_SEED",
            "log_level": "QSTLAB_LOG_LEVEL",
        }
        for field_name, env_name in env_map.items():
            raw = os.getenv(env_name)
            if raw is not None and raw.strip():
                values[field_name] = raw.strip()
        return cls(**values)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Returns:
        Settings read from the environment on first use
    """
    global _settings

    if _settings is None:
        _settings = Settings.from_env()
        logger.debug(f"Loaded settings: {_settings.model_dump()}")

    return _settings


def reset_settings(settings: Optional[Settings] = None) -> None:
    """Replace the cached settings, or drop them so the next call re-reads env."""
    global _settings
    _settings = settings


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once for command-line use."""
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
