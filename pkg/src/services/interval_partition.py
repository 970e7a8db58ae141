from __future__ import annotations

from typing import Any

import numpy as np

from src.models.partition import ClassShape, CompositionKind, IntervalPartition, Orientation
from src.models.report import ValidationReport, Violation
from src.services.errors import IllegalCombinationError


def validate(partition: IntervalPartition) -> ValidationReport:
    if not partition.classes:
        raise ValueError("partition has no classes")
    violations: list[Violation] = []
    first = partition.classes[0]
    last = partition.classes[-1]
    if first.lo != 0.0 or not first.left_closed:
        violations.append(Violation("cover", "first class must contain 0", "0"))
    if last.hi != 1.0 or not last.right_closed:
        violations.append(Violation("cover", "last class must contain 1", "1"))
    for index, (prev, nxt) in enumerate(zip(partition.classes, partition.classes[1:])):
        where = f"classes {index},{index + 1}"
        if nxt.lo < prev.hi:
            violations.append(Violation("overlap", f"classes overlap on {nxt.lo:g}..{prev.hi:g}", where))
        elif nxt.lo > prev.hi:
            violations.append(Violation("gap", f"nothing covers {prev.hi:g}..{nxt.lo:g}", where))
        else:
            owners = int(prev.right_closed) + int(nxt.left_closed)
            if owners == 0:
                violations.append(Violation("adjacency", f"boundary {prev.hi:g} is owned by no class", where))
            elif owners == 2:
                violations.append(Violation("adjacency", f"boundary {prev.hi:g} is owned by both classes", where))
    return ValidationReport(tuple(violations))


def archimedean_kind(shape: ClassShape) -> CompositionKind:
    if shape.is_singleton:
        return CompositionKind.TRIVIAL_SINGLETON
    if shape.left_closed and shape.right_closed:
        return CompositionKind.LUKASIEWICZ
    if shape.right_closed:
        return CompositionKind.PRODUCT
    if shape.left_closed:
        return CompositionKind.REVERSED_PRODUCT
    return CompositionKind.POWER


def semilattice_kind(shape: ClassShape, orientation: Orientation) -> CompositionKind:
    if shape.is_singleton:
        return CompositionKind.TRIVIAL_SINGLETON
    if Orientation(orientation) is Orientation.PRESERVING:
        return CompositionKind.GOEDEL
    if not shape.left_closed:
        raise IllegalCombinationError(f"reversing orientation needs a smallest element, {shape.describe()} has none")
    return CompositionKind.REVERSED_GOEDEL


def locate_many(partition: IntervalPartition, x: Any) -> tuple[np.ndarray, np.ndarray]:
    """Class index (-1 outside every class) and local coordinate for each point."""
    values = np.asarray(x, dtype=float)
    index = np.full(values.shape, -1, dtype=int)
    local = np.zeros(values.shape, dtype=float)
    for i, shape in enumerate(partition.classes):
        mask = shape.contains(values) & (index < 0)
        if mask.any():
            index[mask] = i
            local[mask] = shape.to_local(values[mask])
    return index, local


def locate(partition: IntervalPartition, x: float) -> tuple[int, float]:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"point must lie in [0, 1], got {x}")
    index, local = locate_many(partition, np.array([x]))
    return int(index[0]), float(local[0])


def to_global(partition: IntervalPartition, class_index: int, local: float) -> float:
    return float(partition.classes[class_index].to_global(local))
