from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from src.models.coextension import ArchCoextensionSpec, SemiCoextensionSpec


class DocumentKind(str, Enum):
    TOMONOID = "tomonoid"
    ARCH = "arch-coextension"
    SEMI = "semi-coextension"


@dataclass(frozen=True)
class SpecDocument:
    """Parsed spec file. Tomonoid documents keep the raw table so malformed input can be reported."""

    kind: DocumentKind
    table: tuple[tuple[int, ...], ...] | None = None
    arch: ArchCoextensionSpec | None = None
    semi: SemiCoextensionSpec | None = None

    def __post_init__(self) -> None:
        kind = DocumentKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is DocumentKind.TOMONOID and self.table is None:
            raise ValueError("tomonoid document requires a table")
        if kind is DocumentKind.ARCH and self.arch is None:
            raise ValueError("arch-coextension document requires a spec")
        if kind is DocumentKind.SEMI and self.semi is None:
            raise ValueError("semi-coextension document requires a spec")

    @property
    def coextension(self) -> ArchCoextensionSpec | SemiCoextensionSpec | None:
        return self.arch if self.arch is not None else self.semi

    @property
    def quotient_table(self) -> tuple[tuple[int, ...], ...] | None:
        if self.table is not None:
            return self.table
        spec = self.coextension
        if spec is not None and spec.quotient is not None:
            return spec.quotient.table
        return None
