"""
Line-oriented spec files.

    # comment
    tomonoid 3            followed by 3 rows of 3 element indices
    partition             followed by rows `lo hi L|O R|O` or `point x`
    base odot1.spec       a built t-norm instead of a table ...
    expand 1/2 2/5 3/5 L R    ... with one of its points blown up into a class
    filter lukasiewicz|product|semilattice
    rho 0 2
    numap 0 reversing
    pair 3 2 case=prod-rprod m=2 zmap=affine:0,2 sprime=0,[1/2:1]
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from src.models.coextension import (
    AffineZMap,
    ArchCoextensionSpec,
    BaseExpansion,
    FilterKind,
    FixpointSet,
    NuAssignment,
    PairCase,
    PairFamily,
    RhoAssignment,
    SemiCoextensionSpec,
)
from src.models.document import DocumentKind, SpecDocument
from src.models.partition import ClassShape, IntervalPartition, Orientation
from src.models.tomonoid import FiniteTomonoid
from src.services.errors import SpecParseError

Resolver = Callable[[str], SpecDocument]

SECTIONS = ("tomonoid", "partition", "base", "expand", "filter", "rho", "numap", "pair")
SEMILATTICE = "semilattice"
_TOKEN = re.compile(r"\S+")
_INTERVAL = re.compile(r"^([\[(])(.+):(.+)([\])])$")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int

    def error(self, message: str) -> SpecParseError:
        return SpecParseError(message, self.line, self.column, self.text)


def _tokenize(text: str) -> list[list[_Token]]:
    lines: list[list[_Token]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        tokens = [_Token(match.group(), number, match.start() + 1) for match in _TOKEN.finditer(content)]
        if tokens:
            lines.append(tokens)
    return lines


def _number(token: _Token, text: str | None = None) -> float:
    raw = token.text if text is None else text
    if raw in ("inf", "+inf"):
        return float("inf")
    try:
        return float(Fraction(raw))
    except (ValueError, ZeroDivisionError) as exc:
        raise token.error("expected a number") from exc


def _integer(token: _Token) -> int:
    try:
        return int(token.text)
    except ValueError as exc:
        raise token.error("expected an integer") from exc


def _flag(token: _Token, closed: str) -> bool:
    if token.text not in (closed, "O"):
        raise token.error(f"expected {closed} or O")
    return token.text == closed


def _arity(tokens: list[_Token], count: int) -> None:
    if len(tokens) != count:
        anchor = tokens[count] if len(tokens) > count else tokens[-1]
        raise anchor.error(f"{tokens[0].text} takes {count - 1} arguments, got {len(tokens) - 1}")


def _shape(tokens: list[_Token]) -> ClassShape:
    try:
        return ClassShape(_number(tokens[0]), _number(tokens[1]), _flag(tokens[2], "L"), _flag(tokens[3], "R"))
    except ValueError as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise tokens[0].error(str(exc)) from exc


def _sprime(token: _Token, raw: str) -> FixpointSet:
    components: list[ClassShape] = []
    for item in raw.split(","):
        match = _INTERVAL.match(item)
        try:
            if match:
                left, lo, hi, right = match.groups()
                components.append(ClassShape(_number(token, lo), _number(token, hi), left == "[", right == "]"))
            else:
                components.append(ClassShape.point(_number(token, item)))
        except ValueError as exc:
            if isinstance(exc, SpecParseError):
                raise
            raise token.error(str(exc)) from exc
    try:
        return FixpointSet(tuple(components))
    except ValueError as exc:
        raise token.error(str(exc)) from exc


def _zmap(token: _Token, raw: str) -> AffineZMap:
    if not raw.startswith("affine:"):
        raise token.error("only affine:<c0>,<c1> zmaps are supported")
    parts = raw[len("affine:") :].split(",")
    if len(parts) != 2:
        raise token.error("affine zmap takes two coefficients")
    return AffineZMap(_number(token, parts[0]), _number(token, parts[1]))


def _pair(tokens: list[_Token]) -> PairFamily:
    if len(tokens) < 4:
        raise tokens[-1].error("pair needs R, T and case=<id>")
    r_index, t_index = _integer(tokens[1]), _integer(tokens[2])
    options: dict[str, object] = {}
    for token in tokens[3:]:
        key, sep, value = token.text.partition("=")
        if not sep or not value:
            raise token.error("expected key=value")
        if key in options:
            raise token.error(f"{key} given twice")
        if key == "case":
            try:
                options[key] = PairCase(value)
            except ValueError as exc:
                raise token.error(f"unknown case {value!r}") from exc
        elif key == "m":
            options[key] = _number(token, value)
        elif key == "zmap":
            options[key] = _zmap(token, value)
        elif key == "sprime":
            options[key] = _sprime(token, value)
        else:
            raise token.error(f"unknown pair option {key!r}")
    if "case" not in options:
        raise tokens[0].error("pair needs case=<id>")
    try:
        return PairFamily(r_index, t_index, **options)
    except ValueError as exc:
        raise tokens[0].error(str(exc)) from exc


@dataclass
class _Draft:
    table: list[tuple[int, ...]] | None = None
    table_anchor: _Token | None = None
    partition: list[ClassShape] = field(default_factory=list)
    base: tuple[_Token, SpecDocument] | None = None
    expand: list[tuple[float, ClassShape]] = field(default_factory=list)
    filter_token: _Token | None = None
    rho: list[RhoAssignment] = field(default_factory=list)
    nu: list[NuAssignment] = field(default_factory=list)
    pairs: list[PairFamily] = field(default_factory=list)
    seen: set[str] = field(default_factory=set)


def parse_spec(text: str, resolver: Resolver | None = None) -> SpecDocument:
    lines = _tokenize(text)
    draft = _Draft()
    index = 0
    while index < len(lines):
        tokens = lines[index]
        head = tokens[0]
        index += 1
        if head.text not in SECTIONS:
            raise head.error("unknown section")
        if head.text in ("tomonoid", "partition", "base", "filter") and head.text in draft.seen:
            raise head.error(f"{head.text} given twice")
        draft.seen.add(head.text)

        if head.text == "tomonoid":
            _arity(tokens, 2)
            n = _integer(tokens[1])
            if n < 1:
                raise tokens[1].error("size must be >= 1")
            rows = lines[index : index + n]
            if len(rows) < n:
                raise head.error(f"expected {n} rows, got {len(rows)}")
            table = []
            for row in rows:
                if len(row) != n:
                    raise row[min(len(row), n) - 1].error(f"row has {len(row)} entries, expected {n}")
                table.append(tuple(_integer(token) for token in row))
            draft.table, draft.table_anchor = table, head
            index += n
        elif head.text == "partition":
            _arity(tokens, 1)
            while index < len(lines) and lines[index][0].text not in SECTIONS:
                row = lines[index]
                index += 1
                if row[0].text == "point":
                    _arity(row, 2)
                    draft.partition.append(ClassShape.point(_number(row[1])))
                else:
                    if len(row) != 4:
                        raise row[0].error(f"partition row takes 4 fields, got {len(row)}")
                    draft.partition.append(_shape(row))
        elif head.text == "base":
            _arity(tokens, 2)
            if resolver is None:
                raise tokens[1].error("base specs need a file resolver")
            base = resolver(tokens[1].text)
            if base.coextension is None:
                raise tokens[1].error("base must be a coextension spec")
            draft.base = (tokens[1], base)
        elif head.text == "expand":
            _arity(tokens, 6)
            draft.expand.append((_number(tokens[1]), _shape(tokens[2:])))
        elif head.text == "filter":
            _arity(tokens, 2)
            if tokens[1].text != SEMILATTICE and tokens[1].text not in {kind.value for kind in FilterKind}:
                raise tokens[1].error("unknown filter kind")
            draft.filter_token = tokens[1]
        elif head.text == "rho":
            _arity(tokens, 3)
            try:
                draft.rho.append(RhoAssignment(_integer(tokens[1]), _number(tokens[2])))
            except ValueError as exc:
                if isinstance(exc, SpecParseError):
                    raise
                raise tokens[2].error(str(exc)) from exc
        elif head.text == "numap":
            _arity(tokens, 3)
            try:
                orientation = Orientation(tokens[2].text)
            except ValueError as exc:
                raise tokens[2].error("expected preserving or reversing") from exc
            draft.nu.append(NuAssignment(_integer(tokens[1]), orientation))
        else:
            draft.pairs.append(_pair(tokens))
    return _finish(draft, lines)


def _finish(draft: _Draft, lines: list[list[_Token]]) -> SpecDocument:
    if not lines:
        raise SpecParseError("empty spec")
    coextension_sections = draft.seen - {"tomonoid"}
    if not coextension_sections:
        return SpecDocument(DocumentKind.TOMONOID, table=tuple(draft.table))

    first = lines[0][0]
    if draft.filter_token is None:
        raise first.error("coextension spec needs a filter section")
    if draft.base is not None and draft.table is not None:
        raise first.error("give either a tomonoid table or a base spec, not both")
    if draft.base is not None and draft.partition:
        raise first.error("classes over a base spec come from expand lines")

    quotient = None
    expansion = None
    if draft.base is not None:
        token, base = draft.base
        if not draft.expand:
            raise token.error("base spec needs expand lines")
        ordered = sorted(draft.expand, key=lambda item: item[0])
        expansion = BaseExpansion(token.text, base.coextension, tuple(point for point, _ in ordered))
        partition = IntervalPartition(tuple(shape for _, shape in ordered))
    else:
        if draft.table is None:
            raise first.error("coextension spec needs a tomonoid table or a base spec")
        if draft.expand:
            raise first.error("expand lines need a base spec")
        try:
            quotient = FiniteTomonoid(tuple(draft.table))
        except ValueError as exc:
            raise draft.table_anchor.error(str(exc)) from exc
        partition = IntervalPartition(tuple(draft.partition))

    kind = draft.filter_token.text
    if kind == SEMILATTICE:
        if draft.rho:
            raise draft.filter_token.error("rho lines need an Archimedean filter")
        spec = SemiCoextensionSpec(quotient, partition, tuple(draft.nu), tuple(draft.pairs), expansion)
        return SpecDocument(DocumentKind.SEMI, semi=spec)
    if draft.nu:
        raise draft.filter_token.error("numap lines need a semilattice filter")
    spec = ArchCoextensionSpec(quotient, partition, FilterKind(kind), tuple(draft.rho), tuple(draft.pairs), expansion)
    return SpecDocument(DocumentKind.ARCH, arch=spec)


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_shape(shape: ClassShape) -> str:
    return f"{_fmt(shape.lo)} {_fmt(shape.hi)} {'L' if shape.left_closed else 'O'} {'R' if shape.right_closed else 'O'}"


def _fmt_sprime(sprime: FixpointSet) -> str:
    items = []
    for shape in sprime.components:
        if shape.is_singleton:
            items.append(_fmt(shape.lo))
        else:
            left = "[" if shape.left_closed else "("
            right = "]" if shape.right_closed else ")"
            items.append(f"{left}{_fmt(shape.lo)}:{_fmt(shape.hi)}{right}")
    return ",".join(items)


def _fmt_pair(pair: PairFamily) -> str:
    parts = [f"pair {pair.r_index} {pair.t_index} case={pair.case.value}"]
    if pair.m is not None:
        parts.append(f"m={_fmt(pair.m)}")
    parts.append(f"zmap=affine:{_fmt(pair.zmap.c0)},{_fmt(pair.zmap.c1)}")
    if pair.sprime is not None:
        parts.append(f"sprime={_fmt_sprime(pair.sprime)}")
    return " ".join(parts)


def format_spec(doc: SpecDocument) -> str:
    out: list[str] = []
    if doc.kind is DocumentKind.TOMONOID:
        out.append(f"tomonoid {len(doc.table)}")
        out.extend(" ".join(str(entry) for entry in row) for row in doc.table)
        return "\n".join(out) + "\n"

    spec = doc.coextension
    if spec.expansion is not None:
        out.append(f"base {spec.expansion.base_path}")
        for point, shape in zip(spec.expansion.points, spec.partition.classes):
            out.append(f"expand {_fmt(point)} {_fmt_shape(shape)}")
    else:
        out.append(f"tomonoid {spec.quotient.n}")
        out.extend(" ".join(str(entry) for entry in row) for row in spec.quotient.table)
        out.append("partition")
        for shape in spec.partition.classes:
            out.append(f"point {_fmt(shape.lo)}" if shape.is_singleton else _fmt_shape(shape))
    if doc.kind is DocumentKind.ARCH:
        out.append(f"filter {spec.filter_kind.value}")
        out.extend(f"rho {item.class_index} {_fmt(item.alpha)}" for item in spec.rho)
    else:
        out.append(f"filter {SEMILATTICE}")
        out.extend(f"numap {item.class_index} {item.orientation.value}" for item in spec.nu)
    out.extend(_fmt_pair(pair) for pair in spec.pairs)
    return "\n".join(out) + "\n"


def load_spec(path: str | Path, _stack: tuple[Path, ...] = ()) -> SpecDocument:
    """Reads a spec file; base specs are resolved relative to the including file."""
    target = Path(path).resolve()
    if target in _stack:
        raise SpecParseError(f"base specs include each other: {' -> '.join(p.name for p in _stack + (target,))}")
    try:
        text = target.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc.strerror or exc}") from exc

    def resolve(name: str) -> SpecDocument:
        return load_spec(target.parent / name, _stack + (target,))

    return parse_spec(text, resolver=resolve)
