from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from src.models.partition import ClassShape, IntervalPartition
from src.models.tomonoid import FiniteTomonoid
from src.services.coextension_engine import evaluator_for, structure_for
from src.services.errors import NotACongruenceError
from src.services.spec_parser import load_spec
from src.services.verify import (
    ORACLE_BOUNDARIES,
    boundaries_of,
    check_axioms_grid,
    check_left_continuity,
    compare,
    grid_points,
    oracle,
    oracle_fn,
    recover_base,
    recover_quotient,
    residuum_grid,
)

SPEC_DIR = Path(__file__).resolve().parents[1] / "specs"
ODOTS = ("odot1", "odot2", "odot3", "odot4")
L3 = FiniteTomonoid.from_rows([[0, 0, 0], [0, 0, 1], [0, 1, 2]])
ODOT1_CLASSES = IntervalPartition(
    (ClassShape(0.0, 0.5, True, False), ClassShape.point(0.5), ClassShape(0.5, 1.0, False, True))
)
ODOT2_FIVE = IntervalPartition(
    (
        ClassShape(0.0, 0.2),
        ClassShape(0.2, 0.4, False, False),
        ClassShape(0.4, 0.6),
        ClassShape(0.6, 0.8, False, False),
        ClassShape(0.8, 1.0),
    )
)


def spec(name: str):
    return load_spec(SPEC_DIR / f"{name}.spec").coextension


def minimum(a, b):
    return np.minimum(a, b)


def test_oracle_examples() -> None:
    assert oracle("odot3", 0.6, 0.9) == pytest.approx(0.56)
    assert oracle("odot4", 0.3, 0.9) == pytest.approx(0.3)
    assert oracle("odot2", 0.5, 0.9) == pytest.approx(0.4)
    assert oracle("odot4", 0.7, 0.7) == pytest.approx(0.4375)
    for name in ODOTS:
        for x in (0.0, 0.2, 0.5, 0.77, 1.0):
            assert oracle(name, 1.0, x) == pytest.approx(x, abs=1e-15)


def test_oracles_are_commutative_by_construction() -> None:
    xs = np.linspace(0.0, 1.0, 57)
    a, b = np.meshgrid(xs, xs)
    for name in ODOTS:
        assert np.array_equal(oracle(name, a, b), oracle(name, b, a))


def test_unknown_oracle() -> None:
    with pytest.raises(ValueError):
        oracle("odot9", 0.5, 0.5)


def test_grid_points_include_borders_and_offsets() -> None:
    points = grid_points(11, [0.3])
    assert 0.3 in points
    assert np.any(np.isclose(points, 0.3 - 2.0**-30, rtol=0.0, atol=1e-15))
    assert points[0] == 0.0 and points[-1] == 1.0
    with pytest.raises(ValueError):
        grid_points(1)


def test_missing_identity_is_reported() -> None:
    reports = {report.axiom: report for report in check_axioms_grid(lambda a, b: a * b + 0.01, 11, 1e-9)}
    assert not reports["identity"].passed
    (a,) = reports["identity"].witness
    assert abs(a * 1.0 + 0.01 - a) > 1e-9


@pytest.mark.parametrize("name", ODOTS)
def test_oracles_pass_axiom_grids_coarse(name: str) -> None:
    for report in check_axioms_grid(oracle_fn(name), 41, 1e-9, ORACLE_BOUNDARIES[name]):
        assert report.passed, report


@pytest.mark.parametrize("name", ODOTS)
def test_oracles_are_left_continuous(name: str) -> None:
    assert check_left_continuity(oracle_fn(name), ORACLE_BOUNDARIES[name], 1e-7).passed


def test_left_continuity_examples() -> None:
    report = check_left_continuity(oracle_fn("odot1"), [0.5], 1e-7)
    assert report.passed

    def right_continuous(a, b):
        return np.where(a + b >= 1.0, np.minimum(a, b), 0.0)

    failing = check_left_continuity(right_continuous, [0.5], 1e-7)
    assert not failing.passed
    assert failing.max_deviation == pytest.approx(0.5)
    assert failing.witness == (0.5, 0.5)

    # a = 0 has no left neighbourhood
    assert check_left_continuity(right_continuous, [0.0], 1e-7).samples == 0


def test_recover_quotient_of_nilpotent_minimum() -> None:
    assert recover_quotient(oracle_fn("odot1"), ODOT1_CLASSES) == L3
    assert recover_quotient(evaluator_for(spec("odot1")), ODOT1_CLASSES) == L3


def test_recover_quotient_detects_straddling_products() -> None:
    # 0.1 * 0.6 = 0 but 0.1 * 0.95 = 0.1
    bottom_point = IntervalPartition(
        (ClassShape.point(0.0), ClassShape(0.0, 0.5, False, True), ClassShape(0.5, 1.0, False, True))
    )
    with pytest.raises(NotACongruenceError) as excinfo:
        recover_quotient(oracle_fn("odot1"), bottom_point)
    assert len(excinfo.value.witness) == 4
    # the open gaps of odot2 are runs of singleton classes
    with pytest.raises(NotACongruenceError):
        recover_quotient(oracle_fn("odot2"), ODOT2_FIVE)


def test_recover_quotient_of_minimum() -> None:
    quarters = IntervalPartition(
        (ClassShape(0.0, 0.25), ClassShape(0.25, 0.5, False, True), ClassShape(0.5, 1.0, False, True))
    )
    recovered = recover_quotient(minimum, quarters)
    assert recovered.table == tuple(tuple(min(a, b) for b in range(3)) for a in range(3))


def test_recover_quotient_of_odot2() -> None:
    built = spec("odot2")
    recovered = recover_quotient(evaluator_for(built), built.partition)
    structure = structure_for(built)
    n = len(built.partition)
    expected = tuple(tuple(structure.product_class(i, j) for j in range(n)) for i in range(n))
    assert recovered.table == expected
    assert recovered == L3


def test_recover_base_of_odot2() -> None:
    built = spec("odot2")
    report = recover_base(evaluator_for(built), built)
    assert report.passed, report
    with pytest.raises(ValueError):
        recover_base(evaluator_for(spec("odot3")), spec("odot3"))


def test_compare_examples() -> None:
    report = compare(oracle_fn("odot1"), minimum, 101)
    assert report.max_deviation == pytest.approx(0.5)
    a, b = report.witness
    assert a + b <= 1.0 + 1e-9
    assert compare(oracle_fn("odot3"), oracle_fn("odot3"), 51).max_deviation == 0.0


@pytest.mark.parametrize("name", ODOTS)
def test_built_specs_match_oracles(name: str) -> None:
    built = spec(name)
    borders = sorted(set(boundaries_of(built)) | set(ORACLE_BOUNDARIES[name]))
    report = compare(evaluator_for(built), oracle_fn(name), 201, borders, tol=1e-12)
    assert report.passed, report


@pytest.mark.parametrize("name", ODOTS)
def test_built_specs_pass_axiom_grids_coarse(name: str) -> None:
    built = spec(name)
    fn = evaluator_for(built)
    borders = boundaries_of(built)
    for report in check_axioms_grid(fn, 41, 1e-9, borders):
        assert report.passed, report
    assert check_left_continuity(fn, borders, 1e-7).passed


def test_boundaries_of_expanded_spec_include_base_borders() -> None:
    borders = boundaries_of(spec("odot2"))
    for point in (0.2, 0.4, 0.6, 0.8):
        assert any(abs(point - border) < 1e-12 for border in borders)


def test_residuum_grid_matches_nilpotent_minimum() -> None:
    a = np.array([0.7, 0.7, 0.3])
    b = np.array([0.2, 0.5, 0.1])
    # a -> b is max(1 - a, b) when a > b
    expected = np.maximum(1.0 - a, b)
    assert np.allclose(residuum_grid(oracle_fn("odot1"), a, b), expected, atol=1e-12)
    assert residuum_grid(oracle_fn("odot1"), 0.3, 0.5) == pytest.approx(1.0)


@pytest.mark.slow
@pytest.mark.parametrize("name", ODOTS)
def test_full_resolution_axiom_suite(name: str) -> None:
    built = spec(name)
    borders = sorted(set(boundaries_of(built)) | set(ORACLE_BOUNDARIES[name]))
    for fn in (oracle_fn(name), evaluator_for(built)):
        for report in check_axioms_grid(fn, 201, 1e-9, borders):
            assert report.passed, report
        assert check_left_continuity(fn, borders, 1e-7).passed


@pytest.mark.slow
@pytest.mark.parametrize("name", ODOTS)
def test_full_resolution_oracle_comparison(name: str) -> None:
    built = spec(name)
    borders = sorted(set(boundaries_of(built)) | set(ORACLE_BOUNDARIES[name]))
    assert compare(evaluator_for(built), oracle_fn(name), 1001, borders, tol=1e-12).passed


def test_compare_is_strict_on_declared_borders() -> None:
    def right_continuous(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return np.where(lo >= 1.0 - hi, lo, 0.0)

    report = compare(right_continuous, oracle_fn("odot1"), 101, (0.5,))
    assert not report.passed
    assert report.max_deviation == pytest.approx(0.5)
    assert report.witness == (0.5, 0.5)
    # off the borders the a + b = 1 line is a tie within a few ulps
    assert compare(right_continuous, oracle_fn("odot1"), 101).passed


def test_oracles_are_exact_at_the_identity() -> None:
    assert oracle("odot2", 0.6, 1.0) == 0.6
    assert oracle("odot2", 0.5, 1.0) == 0.5
    assert oracle("odot2", 0.1, 1.0) == 0.1
    assert oracle("odot3", 0.3, 1.0) == 0.3
    for name in ODOTS:
        assert oracle(name, 0.0, 0.9) == 0.0


def test_products_inside_an_open_class_stay_off_its_border() -> None:
    x = 0.75 + 2.0**-30
    assert oracle("odot3", x, x) > 0.75
    assert evaluator_for(spec("odot3"))(np.array([x]), np.array([x]))[0] > 0.75
    y = 0.25 + 2.0**-30
    assert oracle("odot3", y, x) > 0.25


def test_gap_points_stay_inside_their_gap() -> None:
    built = spec("odot2")
    x = np.nextafter(0.6, 1.0)
    structure = structure_for(built)
    p = structure.to_base(np.array([x]))[0]
    assert 0.5 < p < 1.0
    back = structure.embed_base(np.array([p]))[0]
    assert 0.6 < back < 0.8
    assert evaluator_for(built)(np.array([x]), np.array([x]))[0] == x
    assert oracle("odot2", x, x) == x


@pytest.mark.parametrize("name", ("odot2", "odot3"))
def test_associativity_holds_across_class_borders(name: str) -> None:
    built = spec(name)
    borders = sorted(set(boundaries_of(built)) | set(ORACLE_BOUNDARIES[name]))
    for fn in (oracle_fn(name), evaluator_for(built)):
        reports = {report.axiom: report for report in check_axioms_grid(fn, 41, 1e-9, borders)}
        assert reports["associativity"].passed, reports["associativity"]
