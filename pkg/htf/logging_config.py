"""Central logging configuration for htf.

Behavior:
 - Console handler on stderr so stdout stays reserved for data output.
 - Optional rotating file handler (~200KB, several backups) when a log file is given.
 - Idempotent: subsequent calls adjust the level but never duplicate handlers.
"""
from __future__ import annotations

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

from .config import Settings

_FORMAT = "%(asctime)s %(levelname).1s %(name)s %(message)s"
_MARKER = "_htf_handler"


def configure_logging(settings: Settings | None = None) -> None:
    settings = settings or Settings()
    level = getattr(logging, settings.log_level, logging.WARNING)
    root = logging.getLogger("htf")
    root.setLevel(level)

    existing = [h for h in root.handlers if getattr(h, _MARKER, False)]
    if existing:
        for handler in existing:
            handler.setLevel(level)
        return

    formatter = logging.Formatter(_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    setattr(console_handler, _MARKER, True)
    root.addHandler(console_handler)

    if settings.log_file is not None:
        log_path = Path(settings.log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=settings.log_max_bytes,
            backupCount=settings.log_backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        setattr(file_handler, _MARKER, True)
        root.addHandler(file_handler)

    # Records stop at the htf logger; the root logger belongs to the host application.
    root.propagate = False

    root.debug("Logging configured level=%s file=%s", settings.log_level, settings.log_file)
