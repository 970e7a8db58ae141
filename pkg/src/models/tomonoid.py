from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


def _to_table(value: Any) -> tuple[tuple[int, ...], ...]:
    rows = tuple(tuple(int(entry) for entry in row) for row in value)
    if not rows:
        raise ValueError("table is required")
    n = len(rows)
    for index, row in enumerate(rows):
        if len(row) != n:
            raise ValueError(f"row {index} has {len(row)} entries, expected {n}")
        for entry in row:
            if not 0 <= entry < n:
                raise ValueError(f"entry {entry} in row {index} is outside 0..{n - 1}")
    return rows


@dataclass(frozen=True)
class FiniteTomonoid:
    """Cayley table on the chain 0 < 1 < ... < n-1; index n-1 is the identity."""

    table: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", _to_table(self.table))

    @property
    def n(self) -> int:
        return len(self.table)

    @property
    def top(self) -> int:
        return self.n - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=int)

    def product(self, a: int, b: int) -> int:
        return self.table[a][b]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "FiniteTomonoid":
        return cls(tuple(tuple(row) for row in rows))


@dataclass(frozen=True)
class Filter:
    host: FiniteTomonoid
    low: int

    def __post_init__(self) -> None:
        if not 0 <= self.low < self.host.n:
            raise ValueError(f"filter bottom {self.low} is outside 0..{self.host.top}")

    @property
    def kind(self) -> str:
        # finite chains only carry filters of the form [d, 1]
        return "closed"

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(range(self.low, self.host.n))

    @property
    def is_trivial(self) -> bool:
        return self.low == self.host.top

    @property
    def is_improper(self) -> bool:
        return self.low == 0


@dataclass(frozen=True)
class Congruence:
    host: FiniteTomonoid
    classes: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple((int(lo), int(hi)) for lo, hi in self.classes))
        expected = 0
        for lo, hi in self.classes:
            if lo != expected or hi < lo:
                raise ValueError("congruence classes must be consecutive index intervals")
            expected = hi + 1
        if expected != self.host.n:
            raise ValueError("congruence classes must cover the whole chain")

    def class_of(self, element: int) -> int:
        for index, (lo, hi) in enumerate(self.classes):
            if lo <= element <= hi:
                return index
        raise KeyError(f"element not in chain: {element}")

    def members(self, index: int) -> tuple[int, ...]:
        lo, hi = self.classes[index]
        return tuple(range(lo, hi + 1))


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    witness: tuple[int, ...]
    detail: str = ""


@dataclass(frozen=True)
class AxiomReport:
    structural: tuple[str, ...] = ()
    violations: tuple[AxiomViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.structural and not self.violations

    @property
    def axioms(self) -> set[str]:
        return {item.axiom for item in self.violations}

    def lines(self) -> list[str]:
        out = [f"structural: {message}" for message in self.structural]
        for item in self.violations:
            witness = ",".join(str(value) for value in item.witness)
            out.append(f"{item.axiom}: witness=({witness}) {item.detail}".rstrip())
        return out
