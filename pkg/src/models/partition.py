from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np


class ShapeKind(str, Enum):
    SINGLETON = "singleton"
    INTERVAL = "interval"


class CompositionKind(str, Enum):
    LUKASIEWICZ = "lukasiewicz"
    PRODUCT = "product"
    REVERSED_PRODUCT = "reversed_product"
    POWER = "power"
    GOEDEL = "goedel"
    REVERSED_GOEDEL = "reversed_goedel"
    TRIVIAL_SINGLETON = "trivial_singleton"


class Orientation(str, Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"


def _to_bound(value: Any, field_name: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{field_name} must be a real number") from exc
    if not np.isfinite(number):
        raise ValueError(f"{field_name} must be finite")
    return number


@dataclass(frozen=True)
class ClassShape:
    """A singleton or an interval inside [0, 1] with open/closed border flags."""

    lo: float
    hi: float
    left_closed: bool = True
    right_closed: bool = True

    def __post_init__(self) -> None:
        lo = _to_bound(self.lo, "lo")
        hi = _to_bound(self.hi, "hi")
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"class bounds must satisfy 0 <= lo <= hi <= 1, got {lo}, {hi}")
        if lo == hi and not (self.left_closed and self.right_closed):
            raise ValueError("a singleton class must be closed on both sides")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "left_closed", bool(self.left_closed))
        object.__setattr__(self, "right_closed", bool(self.right_closed))

    @classmethod
    def point(cls, x: float) -> "ClassShape":
        return cls(x, x, True, True)

    @property
    def kind(self) -> ShapeKind:
        return ShapeKind.SINGLETON if self.lo == self.hi else ShapeKind.INTERVAL

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    @property
    def has_min(self) -> bool:
        return self.left_closed

    @property
    def has_max(self) -> bool:
        return self.right_closed

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: Any) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        above = values >= self.lo if self.left_closed else values > self.lo
        below = values <= self.hi if self.right_closed else values < self.hi
        return above & below

    def to_local(self, x: Any) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        if self.is_singleton:
            return np.zeros_like(values)
        return (values - self.lo) / (self.hi - self.lo)

    def to_global(self, u: Any) -> np.ndarray:
        values = np.asarray(u, dtype=float)
        if self.is_singleton:
            return np.full_like(values, self.lo)
        return self.lo + values * (self.hi - self.lo)

    def clamp(self, x: Any) -> np.ndarray:
        """Pulls values that rounded onto or past an open end back to the nearest member."""
        values = np.asarray(x, dtype=float)
        if self.is_singleton:
            return np.full_like(values, self.lo)
        low = self.lo if self.left_closed else np.nextafter(self.lo, self.hi)
        high = self.hi if self.right_closed else np.nextafter(self.hi, self.lo)
        return np.clip(values, low, high)

    def describe(self) -> str:
        if self.is_singleton:
            return f"{{{self.lo:g}}}"
        left = "[" if self.left_closed else "("
        right = "]" if self.right_closed else ")"
        return f"{left}{self.lo:g},{self.hi:g}{right}"


@dataclass(frozen=True)
class IntervalPartition:
    classes: tuple[ClassShape, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(self.classes))

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, index: int) -> ClassShape:
        return self.classes[index]

    @property
    def filter_index(self) -> int:
        return len(self.classes) - 1

    @property
    def filter_class(self) -> ClassShape:
        return self.classes[-1]

    def boundaries(self) -> list[float]:
        points = {shape.lo for shape in self.classes} | {shape.hi for shape in self.classes}
        return sorted(point for point in points if 0.0 < point < 1.0)
