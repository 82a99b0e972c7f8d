"""Single-line key=value logging used by the watcher and API."""

from __future__ import annotations

import logging
import sys

logger = logging.getLogger("ontovec")


def kv_line(event: str, **fields) -> str:
    """Format an event plus fields as `event key=value key=value`."""
    parts = [event]
    for key, value in fields.items():
        text = str(value)
        if any(ch.isspace() for ch in text) or not text:
            text = '"' + text.replace('"', '\\"') + '"'
        parts.append(f"{key}={text}")
    return " ".join(parts)


def log_event(event: str, level: int = logging.INFO, **fields) -> None:
    logger.log(level, kv_line(event, **fields))


def configure_logging(level: int = logging.INFO) -> None:
    """Send timestamped package logs to stderr; safe to call twice."""
    if any(getattr(h, "_ontovec", False) for h in logger.handlers):
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    handler._ontovec = True
    logger.addHandler(handler)
    logger.setLevel(level)
