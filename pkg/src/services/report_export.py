from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable

import numpy as np
import pandas as pd

from src.models.report import GridReport, ValidationReport


def grid_reports_frame(reports: Iterable[GridReport]) -> pd.DataFrame:
    columns = ["axiom", "max_deviation", "witness", "samples", "tolerance", "passed"]
    return pd.DataFrame([report.to_row() for report in reports], columns=columns)


def validation_frame(report: ValidationReport) -> pd.DataFrame:
    rows = [{"code": item.code, "message": item.message, "where": item.where} for item in report]
    return pd.DataFrame(rows, columns=["code", "message", "where"])


def case_frame(rows: Iterable[dict[str, Any]]) -> pd.DataFrame:
    columns = ["r", "t", "s", "r_kind", "s_kind", "context", "case", "given"]
    return pd.DataFrame(list(rows), columns=columns)


def values_frame(a: np.ndarray, b: np.ndarray, values: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(
        {"a": np.ravel(a).astype(float), "b": np.ravel(b).astype(float), "value": np.ravel(values).astype(float)}
    )


def to_csv_text(frame: pd.DataFrame) -> str:
    # default float formatting writes the shortest round-trip decimal
    return frame.to_csv(index=False, lineterminator="\n")


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(to_csv_text(frame), encoding="utf-8")
    return target


def findings_frame(lines: Iterable[str]) -> pd.DataFrame:
    return pd.DataFrame([{"finding": line} for line in lines], columns=["finding"])
