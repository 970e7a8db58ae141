from __future__ import annotations

from pathlib import Path

import pytest

from src.models.coextension import FilterKind, PairCase
from src.models.document import DocumentKind
from src.models.partition import Orientation
from src.services.coextension_engine import validate_any
from src.services.errors import SpecParseError
from src.services.spec_parser import format_spec, load_spec, parse_spec

SPEC_DIR = Path(__file__).resolve().parents[1] / "specs"


def resolver(name: str):
    return load_spec(SPEC_DIR / name)


def test_two_chain() -> None:
    doc = parse_spec("tomonoid 2\n0 0\n0 1\n")
    assert doc.kind is DocumentKind.TOMONOID
    assert doc.table == ((0, 0), (0, 1))
    assert doc.coextension is None


@pytest.mark.parametrize("name", ["odot1", "odot2", "odot3", "odot4"])
def test_shipped_specs_parse_and_validate(name: str) -> None:
    doc = load_spec(SPEC_DIR / f"{name}.spec")
    assert validate_any(doc.coextension).ok


@pytest.mark.parametrize("name", ["odot1", "odot2", "odot3", "odot4"])
def test_print_then_parse_round_trip(name: str) -> None:
    doc = load_spec(SPEC_DIR / f"{name}.spec")
    assert parse_spec(format_spec(doc), resolver=resolver) == doc


def test_odot2_fields() -> None:
    spec = load_spec(SPEC_DIR / "odot2.spec").arch
    assert spec.filter_kind is FilterKind.LUKASIEWICZ
    assert spec.expansion.points == (0.0, 0.5, 1.0)
    assert spec.alpha_for(1) == 3.0
    pair = spec.pair_for(1, 1)
    assert pair.case is PairCase.LUK_LUK
    assert pair.zmap.c0 == pytest.approx(-2.0 / 3.0)


def test_odot4_fields() -> None:
    spec = load_spec(SPEC_DIR / "odot4.spec").semi
    assert spec.orientation_for(0) is Orientation.REVERSING
    assert spec.pair_for(3, 3).m == 0.75
    sprime = spec.pair_for(3, 2).sprime
    assert sprime.contains(0.0) and sprime.contains(0.5) and not sprime.contains(0.25)


def test_unknown_case_names_the_token() -> None:
    text = (SPEC_DIR / "odot3.spec").read_text(encoding="utf-8") + "pair 1 2 case=unknown\n"
    with pytest.raises(SpecParseError) as excinfo:
        parse_spec(text)
    assert excinfo.value.token == "case=unknown"
    assert "unknown case 'unknown'" in str(excinfo.value)
    assert excinfo.value.line == len(text.splitlines())


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("tomonoid 2\n0 0\n", "expected 2 rows"),
        ("tomonoid 2\n0 0 0\n0 1\n", "row has 3 entries"),
        ("tomonoid x\n", "expected an integer"),
        ("colour blue\n", "unknown section"),
        ("tomonoid 1\n0\npartition\n0 1 L R\nfilter maybe\n", "unknown filter kind"),
        ("tomonoid 1\n0\npartition\n0 one L R\nfilter product\n", "expected a number"),
        ("tomonoid 1\n0\npartition\n0 1 L X\nfilter product\n", "expected R or O"),
        ("tomonoid 1\n0\npartition\n0 1 L R\nfilter product\nrho 0\n", "rho takes 2 arguments"),
        ("tomonoid 1\n0\npartition\n0 1 L R\n", "needs a filter section"),
        ("base odot1.spec\nfilter product\n", "base specs need a file resolver"),
        ("", "empty spec"),
    ],
)
def test_parse_errors(text: str, message: str) -> None:
    with pytest.raises(SpecParseError, match=message):
        parse_spec(text)


def test_parse_error_positions() -> None:
    with pytest.raises(SpecParseError) as excinfo:
        parse_spec("# header\ntomonoid 1\n0\npartition\n0 1 L R\nfilter product\nrho 0 abc\n")
    assert (excinfo.value.line, excinfo.value.column) == (7, 7)


def test_load_spec_detects_include_cycles(tmp_path: Path) -> None:
    (tmp_path / "a.spec").write_text("base b.spec\nexpand 1 0 1 L R\nfilter product\n", encoding="utf-8")
    (tmp_path / "b.spec").write_text("base a.spec\nexpand 1 0 1 L R\nfilter product\n", encoding="utf-8")
    with pytest.raises(SpecParseError, match="include each other"):
        load_spec(tmp_path / "a.spec")


def test_load_spec_missing_file(tmp_path: Path) -> None:
    with pytest.raises(SpecParseError, match="cannot read"):
        load_spec(tmp_path / "missing.spec")
