from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path


DEFAULT_LOG_DIR = "logs"
DEFAULT_SPEC_DIR = "specs"
DEFAULT_GRID_N = 201
DEFAULT_TOL = 1e-9
DEFAULT_LC_TOL = 1e-7
DEFAULT_COMPARE_N = 1001
DEFAULT_ENUM_LIMIT = 6


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name) or str(default)
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be integer") from exc


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name) or repr(default)
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be a real number") from exc


@dataclass(frozen=True)
class Settings:
    log_dir: Path
    spec_dir: Path
    grid_n: int
    tol: float
    lc_tol: float
    compare_n: int
    enum_limit: int

    def __post_init__(self) -> None:
        if self.grid_n < 2:
            raise ValueError("TNORM_GRID_N must be >= 2")
        if self.compare_n < 2:
            raise ValueError("TNORM_COMPARE_N must be >= 2")
        if self.tol < 0 or self.lc_tol < 0:
            raise ValueError("tolerances must be >= 0")
        if self.enum_limit < 1:
            raise ValueError("TNORM_ENUM_LIMIT must be >= 1")


def load_settings() -> Settings:
    return Settings(
        log_dir=Path(os.getenv("TNORM_LOG_DIR") or DEFAULT_LOG_DIR),
        spec_dir=Path(os.getenv("TNORM_SPEC_DIR") or DEFAULT_SPEC_DIR),
        grid_n=_env_int("TNORM_GRID_N", DEFAULT_GRID_N),
        tol=_env_float("TNORM_TOL", DEFAULT_TOL),
        lc_tol=_env_float("TNORM_LC_TOL", DEFAULT_LC_TOL),
        compare_n=_env_int("TNORM_COMPARE_N", DEFAULT_COMPARE_N),
        enum_limit=_env_int("TNORM_ENUM_LIMIT", DEFAULT_ENUM_LIMIT),
    )
