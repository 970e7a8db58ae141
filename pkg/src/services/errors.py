from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.models.report import ValidationReport
    from src.models.tomonoid import AxiomReport


class MalformedTableError(ValueError):
    """The table is not an n x n array of element indices."""


class AxiomViolationError(RuntimeError):
    """A well-formed table violates one of the tomonoid axioms."""

    def __init__(self, report: AxiomReport) -> None:
        self.report = report
        names = ", ".join(sorted({item.axiom for item in report.violations}))
        super().__init__(f"table violates: {names}")


class EnumerationLimitError(RuntimeError):
    """Exhaustive enumeration was requested for a chain that is too long."""


class IllegalCombinationError(RuntimeError):
    """A composition kind was paired with a filter or orientation it cannot carry."""


class ParameterRangeError(RuntimeError):
    """A family parameter or a local coordinate lies outside its legal range."""


class NotACongruenceError(RuntimeError):
    """Products of two classes do not stay inside a single class."""

    def __init__(self, message: str, witness: tuple[float, ...] = ()) -> None:
        self.witness = witness
        super().__init__(message)


class InvalidSpecError(RuntimeError):
    """A coextension spec was evaluated although its validation report is not empty."""

    def __init__(self, report: ValidationReport) -> None:
        self.report = report
        super().__init__("invalid coextension spec: " + "; ".join(report.messages()))


class SpecParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, token: str = "") -> None:
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}" if line else "input"
        detail = f" near {token!r}" if token else ""
        super().__init__(f"{where}: {message}{detail}")
