from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

os.environ.setdefault("TNORM_LOG_DIR", tempfile.mkdtemp(prefix="tnorm-logs-"))


def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "slow: full-resolution grid checks")


def pytest_sessionstart(session) -> None:
    # bind console handlers before CliRunner swaps the standard streams
    from src.utils.logger import get_app_logger, get_audit_logger, get_error_logger

    get_app_logger()
    get_error_logger()
    get_audit_logger()
