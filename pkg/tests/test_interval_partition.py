from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.models.partition import ClassShape, CompositionKind, IntervalPartition, Orientation
from src.services.errors import IllegalCombinationError
from src.services.interval_partition import (
    archimedean_kind,
    locate,
    semilattice_kind,
    to_global,
    validate,
)

ODOT2 = IntervalPartition(
    (
        ClassShape(0.0, 0.2),
        ClassShape(0.2, 0.4, False, False),
        ClassShape(0.4, 0.6),
        ClassShape(0.6, 0.8, False, False),
        ClassShape(0.8, 1.0),
    )
)


def test_validate_accepts_covers() -> None:
    two = IntervalPartition((ClassShape.point(0.0), ClassShape(0.0, 1.0, False, True)))
    assert validate(two).ok
    quarters = IntervalPartition(
        (
            ClassShape(0.0, 0.25),
            ClassShape(0.25, 0.5, False, True),
            ClassShape(0.5, 0.75, False, True),
            ClassShape(0.75, 1.0, False, True),
        )
    )
    assert validate(quarters).ok
    assert validate(ODOT2).ok


def test_validate_reports_overlap_gap_and_ownership() -> None:
    overlap = IntervalPartition((ClassShape(0.0, 0.5, True, False), ClassShape(0.25, 1.0)))
    assert "overlap" in validate(overlap).codes

    gap = IntervalPartition((ClassShape(0.0, 0.25), ClassShape(0.5, 1.0)))
    assert "gap" in validate(gap).codes

    both = IntervalPartition((ClassShape(0.0, 0.5), ClassShape(0.5, 1.0)))
    assert "adjacency" in validate(both).codes

    neither = IntervalPartition((ClassShape(0.0, 0.5, True, False), ClassShape(0.5, 1.0, False, True)))
    report = validate(neither)
    assert "adjacency" in report.codes
    assert any("0.5" in message for message in report.messages())

    uncovered = IntervalPartition((ClassShape(0.0, 1.0, False, False),))
    assert "cover" in validate(uncovered).codes


def test_validate_rejects_empty_partition() -> None:
    with pytest.raises(ValueError):
        validate(IntervalPartition(()))


def test_clamp_keeps_rounded_values_inside_the_class() -> None:
    open_class = ClassShape(0.75, 1.0, False, True)
    assert open_class.clamp(0.75) == np.nextafter(0.75, 1.0)
    assert open_class.clamp(0.9) == 0.9
    assert ClassShape(0.2, 0.4, False, False).clamp(0.4) == np.nextafter(0.4, 0.0)
    assert ClassShape(0.0, 0.5).clamp(0.5) == 0.5
    assert ClassShape.point(0.25).clamp(0.2500001) == 0.25


def test_class_shape_rejects_bad_bounds() -> None:
    with pytest.raises(ValueError):
        ClassShape(0.6, 0.4)
    with pytest.raises(ValueError):
        ClassShape(0.5, 0.5, False, True)
    with pytest.raises(ValueError):
        ClassShape(0.0, 1.5)


@pytest.mark.parametrize(
    ("left_closed", "right_closed", "expected"),
    [
        (True, True, CompositionKind.LUKASIEWICZ),
        (False, True, CompositionKind.PRODUCT),
        (True, False, CompositionKind.REVERSED_PRODUCT),
        (False, False, CompositionKind.POWER),
    ],
)
def test_archimedean_kind_depends_on_flags_only(left_closed: bool, right_closed: bool, expected: CompositionKind) -> None:
    for lo, hi in ((0.0, 1.0), (0.25, 0.5), (0.75, 1.0)):
        assert archimedean_kind(ClassShape(lo, hi, left_closed, right_closed)) is expected


def test_archimedean_kind_of_singleton() -> None:
    assert archimedean_kind(ClassShape.point(0.25)) is CompositionKind.TRIVIAL_SINGLETON


def test_semilattice_kind() -> None:
    assert semilattice_kind(ClassShape(0.0, 1.0, False, True), Orientation.PRESERVING) is CompositionKind.GOEDEL
    assert semilattice_kind(ClassShape(0.0, 1.0, True, False), Orientation.REVERSING) is CompositionKind.REVERSED_GOEDEL
    with pytest.raises(IllegalCombinationError):
        semilattice_kind(ClassShape(0.0, 1.0, False, False), Orientation.REVERSING)


def test_locate() -> None:
    index, local = locate(ODOT2, 0.5)
    assert index == 2
    assert local == pytest.approx(0.5)
    assert locate(ODOT2, 1.0) == (4, 1.0)
    # 0.4 is owned by the closed class on its right
    assert locate(ODOT2, 0.4) == (2, 0.0)
    assert locate(ODOT2, 0.2) == (0, 1.0)
    with pytest.raises(ValueError):
        locate(ODOT2, 1.5)


@given(st.integers(min_value=0, max_value=4), st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_locate_inverts_to_global(index: int, local: float) -> None:
    x = to_global(ODOT2, index, local)
    found, back = locate(ODOT2, x)
    assert found == index
    assert back == pytest.approx(local, abs=1e-12)
