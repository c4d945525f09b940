# app/core/logs.py
from __future__ import annotations
import logging.config
from typing import Optional

from app.core.config import LOG_LEVEL

# One console layout for the CLI and the uvicorn-hosted service.
_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"

def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once for CLI or service use. Libraries only call getLogger."""
    logging.config.dictConfig({
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"generic": {"format": _FORMAT, "datefmt": "%H:%M:%S"}},
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
                "formatter": "generic",
            },
        },
        "root": {"level": (level or LOG_LEVEL).upper(), "handlers": ["console"]},
        "loggers": {
            "sqlalchemy.engine": {"level": "WARNING"},
        },
    })
