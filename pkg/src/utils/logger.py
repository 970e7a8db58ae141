from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Iterator

from src.utils.settings import load_settings

_FORMAT = "%(asctime)s %(levelname)s %(message)s"

# logger name -> (file under the log dir, file level)
_CHANNELS = {
    "tnorm.app": ("app.log", logging.INFO),
    "tnorm.error": ("error.log", logging.ERROR),
    "tnorm.audit": ("audit.log", logging.INFO),
}


def _handler(handler: logging.Handler, level: int) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(_FORMAT))
    return handler


def _channel(name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    filename, level = _CHANNELS[name]
    log_dir = load_settings().log_dir
    log_dir.mkdir(parents=True, exist_ok=True)

    logger.setLevel(level)
    logger.propagate = False
    logger.addHandler(_handler(logging.FileHandler(log_dir / filename, encoding="utf-8"), level))
    logger.addHandler(_handler(logging.StreamHandler(), logging.WARNING))
    return logger


def get_app_logger() -> logging.Logger:
    return _channel("tnorm.app")


def get_error_logger() -> logging.Logger:
    return _channel("tnorm.error")


def get_audit_logger() -> logging.Logger:
    return _channel("tnorm.audit")


@contextmanager
def timed(label: str) -> Iterator[None]:
    """Log the wall time of the enclosed block to the app log."""
    started = time.perf_counter()
    try:
        yield
    finally:
        get_app_logger().info("%s took %.3fs", label, time.perf_counter() - started)
