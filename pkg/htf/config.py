"""Run settings for the htf command line and library.

Only ambient concerns live here (logging and bench parallelism).  The
numerical knobs are carried by the option models in ``htf.models.options``
so that every fit states its configuration explicitly.

Settings are built from explicit overrides only; nothing is read from the
process environment, which keeps every run reproducible from its flags.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, field_validator

logger = logging.getLogger("htf.config")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class Settings(BaseModel):
    """Strongly-typed run settings.

    Use ``load_settings()`` to construct; do not instantiate directly.
    """

    # ── Logging ─────────────────────────────────────────────────────────
    log_level: str = "WARNING"
    log_file: Path | None = None
    log_max_bytes: int = 204800
    log_backup_count: int = 10

    # ── Benchmark ───────────────────────────────────────────────────────
    workers: int = 1

    # ── Validators ──────────────────────────────────────────────────────

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        return value

    @field_validator("log_max_bytes", "log_backup_count", "workers")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value


def load_settings(**overrides: Any) -> Settings:
    """Build a ``Settings`` instance from explicit overrides.

    ``None`` values are dropped so CLI flags that were not given fall back
    to the defaults.
    """
    s = Settings(**{key: value for key, value in overrides.items() if value is not None})
    logger.debug("settings loaded  level=%s  file=%s  workers=%d", s.log_level, s.log_file, s.workers)
    return s
