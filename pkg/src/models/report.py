from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Empty iff the validated object satisfies every checked condition."""

    violations: tuple[Violation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "violations", tuple(self.violations))

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> set[str]:
        return {item.code for item in self.violations}

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def merged(self, other: "ValidationReport", prefix: str = "") -> "ValidationReport":
        extra = tuple(
            Violation(item.code, f"{prefix}{item.message}" if prefix else item.message, item.where)
            for item in other.violations
        )
        return ValidationReport(self.violations + extra)

    def messages(self) -> list[str]:
        return [
            f"[{item.code}] {item.message}" + (f" at {item.where}" if item.where else "")
            for item in self.violations
        ]


@dataclass(frozen=True)
class GridReport:
    axiom: str
    max_deviation: float
    witness: tuple[float, ...]
    samples: int
    tolerance: float = 0.0

    def __post_init__(self) -> None:
        if self.max_deviation < 0:
            raise ValueError("max_deviation must be >= 0")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_row(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "max_deviation": self.max_deviation,
            "witness": " ".join(repr(float(value)) for value in self.witness),
            "samples": self.samples,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
