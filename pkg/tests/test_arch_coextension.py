from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.models.coextension import FilterKind, PairCase, PairContext
from src.models.partition import CompositionKind
from src.services.arch_coextension import (
    CANONICAL_INTERVALS,
    FAMILY_KINDS,
    case_table,
    evaluate,
    filter_op,
    lambda_rs_apply,
    pair_case,
    parameter_range,
    rho_apply,
    validate_spec,
    verify_commuting,
)
from src.services.errors import IllegalCombinationError, InvalidSpecError, ParameterRangeError
from src.services.spec_parser import load_spec, parse_spec

SPEC_DIR = Path(__file__).resolve().parents[1] / "specs"
LUK = CompositionKind.LUKASIEWICZ
PROD = CompositionKind.PRODUCT
RPROD = CompositionKind.REVERSED_PRODUCT
POWER = CompositionKind.POWER
LUK_F = FilterKind.LUKASIEWICZ
PROD_F = FilterKind.PRODUCT
ALPHAS = (0.5, 1.0, 2.0, 3.0)

IMPOSSIBLE_SPEC = """
tomonoid 4
0 0 0 0
0 0 0 1
0 0 1 2
0 1 2 3
partition
0 1/4 L R
1/4 1/2 O O
1/2 3/4 L R
3/4 1 O R
filter product
rho 0 1
rho 1 1
rho 2 1
"""


def odot(name: str):
    return load_spec(SPEC_DIR / f"{name}.spec").arch


def test_filter_op() -> None:
    assert filter_op(LUK_F, 0.7, 0.6) == pytest.approx(0.3)
    assert filter_op(PROD_F, 0.5, 0.5) == pytest.approx(0.25)
    for kind in FilterKind:
        assert filter_op(kind, 0.37, 1.0) == 0.37


def test_rho_apply_examples() -> None:
    assert rho_apply(LUK, LUK_F, 3.0, 0.9, 0.5) == pytest.approx(0.2)
    assert rho_apply(POWER, PROD_F, 1.0, math.exp(-1.0), 0.5) == pytest.approx(0.5**math.e)
    for kind in (LUK, PROD, RPROD, POWER):
        assert rho_apply(kind, PROD_F, 2.0, 1.0, 0.42) == pytest.approx(0.42, abs=1e-15)
    assert rho_apply(LUK, LUK_F, 1.5, 1.0, 0.42) == pytest.approx(0.42, abs=1e-15)


def test_rho_apply_rejects_illegal_combinations() -> None:
    with pytest.raises(IllegalCombinationError):
        rho_apply(PROD, LUK_F, 2.0, 0.5, 0.5)
    with pytest.raises(IllegalCombinationError, match="α ≥ 1"):
        rho_apply(LUK, LUK_F, 0.5, 0.5, 0.5)
    with pytest.raises(IllegalCombinationError):
        rho_apply(LUK, PROD_F, 0.0, 0.5, 0.5)


_CLASS_R = {
    LUK: st.floats(min_value=0.0, max_value=1.0),
    PROD: st.floats(min_value=1e-3, max_value=1.0),
    RPROD: st.floats(min_value=0.0, max_value=0.999),
    POWER: st.floats(min_value=0.05, max_value=0.95),
}


@pytest.mark.parametrize("kind", [LUK, PROD, RPROD, POWER])
@given(data=st.data())
def test_rho_is_a_homomorphism_under_product_filter(kind: CompositionKind, data) -> None:
    alpha = data.draw(st.sampled_from(ALPHAS))
    f = data.draw(st.floats(min_value=0.5, max_value=1.0))
    g = data.draw(st.floats(min_value=0.5, max_value=1.0))
    r = data.draw(_CLASS_R[kind])
    once = rho_apply(kind, PROD_F, alpha, filter_op(PROD_F, f, g), r)
    twice = rho_apply(kind, PROD_F, alpha, f, rho_apply(kind, PROD_F, alpha, g, r))
    assert once == pytest.approx(twice, abs=1e-12)


@given(
    st.sampled_from((1.0, 2.0, 3.0)),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_rho_is_a_homomorphism_under_lukasiewicz_filter(alpha: float, f: float, g: float, r: float) -> None:
    once = rho_apply(LUK, LUK_F, alpha, filter_op(LUK_F, f, g), r)
    twice = rho_apply(LUK, LUK_F, alpha, f, rho_apply(LUK, LUK_F, alpha, g, r))
    assert once == pytest.approx(twice, abs=1e-12)


PRODUCT_FILTER_TABLE = {
    (LUK, LUK): PairCase.LUK_LUK,
    (LUK, PROD): PairCase.IMPOSSIBLE,
    (LUK, RPROD): PairCase.LUK_RPROD,
    (LUK, POWER): PairCase.IMPOSSIBLE,
    (PROD, LUK): PairCase.PROD_LUK,
    (PROD, PROD): PairCase.PROD_PROD,
    (PROD, RPROD): PairCase.PROD_RPROD,
    (PROD, POWER): PairCase.PROD_POWER,
    (RPROD, LUK): PairCase.TRIVIAL,
    (RPROD, PROD): PairCase.IMPOSSIBLE,
    (RPROD, RPROD): PairCase.RPROD_RPROD,
    (RPROD, POWER): PairCase.IMPOSSIBLE,
    (POWER, LUK): PairCase.TRIVIAL,
    (POWER, PROD): PairCase.IMPOSSIBLE,
    (POWER, RPROD): PairCase.POWER_RPROD,
    (POWER, POWER): PairCase.POWER_POWER,
}


@pytest.mark.parametrize(("r_kind", "s_kind"), list(itertools.product((LUK, PROD, RPROD, POWER), repeat=2)))
@pytest.mark.parametrize("filter_kind", [LUK_F, PROD_F])
def test_pair_case_table(r_kind: CompositionKind, s_kind: CompositionKind, filter_kind: FilterKind) -> None:
    if filter_kind is LUK_F:
        expected = PairCase.LUK_LUK if (r_kind, s_kind) == (LUK, LUK) else PairCase.IMPOSSIBLE
    else:
        expected = PRODUCT_FILTER_TABLE[(r_kind, s_kind)]
    assert pair_case(r_kind, s_kind, filter_kind, PairContext.MAXIMAL) is expected


def test_pair_case_table_counts() -> None:
    found = [pair_case(r, s, PROD_F, PairContext.MAXIMAL) for r, s in PRODUCT_FILTER_TABLE]
    assert found.count(PairCase.IMPOSSIBLE) == 5
    assert {case for case in found if case.is_family} == set(FAMILY_KINDS)


@pytest.mark.parametrize(
    "context",
    [PairContext.NON_MAXIMAL, PairContext.SINGLETON_R, PairContext.SINGLETON_S, PairContext.SINGLETON_T],
)
def test_pair_case_is_trivial_outside_maximal_pairs(context: PairContext) -> None:
    assert pair_case(LUK, POWER, PROD_F, context) is PairCase.TRIVIAL
    assert pair_case(LUK, LUK, LUK_F, context) is PairCase.TRIVIAL


def test_lambda_rs_apply_examples() -> None:
    assert lambda_rs_apply(PairCase.PROD_PROD, 1.0, 1.0, 0.5, 0.5) == pytest.approx(0.25)
    assert lambda_rs_apply(PairCase.POWER_POWER, 1.0, 1.0, 0.5, math.exp(-1.0)) == pytest.approx(0.5)
    # z = 0 is only legal while alpha_S <= alpha_R
    assert lambda_rs_apply(PairCase.LUK_LUK, 2.0, 2.0, 0.0, 0.3) == pytest.approx(0.3)
    with pytest.raises(ParameterRangeError):
        lambda_rs_apply(PairCase.LUK_LUK, 1.0, 2.0, 0.0, 0.3)


def test_lambda_rs_apply_rejects_bad_arguments() -> None:
    with pytest.raises(ParameterRangeError):
        lambda_rs_apply(PairCase.PROD_PROD, 1.0, 1.0, 0.0, 0.5)
    with pytest.raises(ParameterRangeError):
        lambda_rs_apply(PairCase.PROD_PROD, 1.0, 1.0, 0.5, 0.0)
    with pytest.raises(ParameterRangeError):
        lambda_rs_apply(PairCase.PROD_PROD, 1.0, 1.0, 0.5, 0.5, m=0.25)
    with pytest.raises(IllegalCombinationError):
        lambda_rs_apply(PairCase.TRIVIAL, 1.0, 1.0, 0.5, 0.5)


def _legal_z(rng: np.random.Generator, case: PairCase, alpha_r: float, alpha_s: float, size: int) -> np.ndarray:
    params = parameter_range(case, alpha_r, alpha_s)
    high = params.high if np.isfinite(params.high) else params.low + 5.0
    u = rng.random(size)
    if not params.low_closed:
        u = 1.0 - u
    z = params.low + u * (high - params.low)
    return z[params.contains(z)]


def _inner_r(rng: np.random.Generator, size: int) -> np.ndarray:
    return 0.05 + 0.9 * rng.random(size)


@pytest.mark.parametrize("case", list(FAMILY_KINDS))
@pytest.mark.parametrize(("alpha_r", "alpha_s"), list(itertools.product(ALPHAS, repeat=2)))
def test_families_intertwine_the_filter_action(case: PairCase, alpha_r: float, alpha_s: float) -> None:
    r_kind, s_kind = FAMILY_KINDS[case]
    rng = np.random.default_rng(17)
    zs = _legal_z(rng, case, alpha_r, alpha_s, 100)
    fs = 0.5 + 0.5 * rng.random(zs.size)
    rs = _inner_r(rng, zs.size)
    for f, z, r in zip(fs, zs, rs):
        acted = rho_apply(r_kind, PROD_F, alpha_r, f, r)
        left = lambda_rs_apply(case, alpha_r, alpha_s, z, acted)
        right = rho_apply(s_kind, PROD_F, alpha_s, f, lambda_rs_apply(case, alpha_r, alpha_s, z, r))
        assert left == pytest.approx(right, abs=1e-12)


@pytest.mark.parametrize(("alpha_r", "alpha_s"), list(itertools.product((1.0, 2.0, 3.0), repeat=2)))
def test_lukasiewicz_family_intertwines_under_lukasiewicz_filter(alpha_r: float, alpha_s: float) -> None:
    rng = np.random.default_rng(3)
    zs = _legal_z(rng, PairCase.LUK_LUK, alpha_r, alpha_s, 100)
    for f, z, r in zip(rng.random(zs.size), zs, rng.random(zs.size)):
        acted = rho_apply(LUK, LUK_F, alpha_r, f, r)
        left = lambda_rs_apply(PairCase.LUK_LUK, alpha_r, alpha_s, z, acted)
        right = rho_apply(LUK, LUK_F, alpha_s, f, lambda_rs_apply(PairCase.LUK_LUK, alpha_r, alpha_s, z, r))
        assert left == pytest.approx(right, abs=1e-12)


@pytest.mark.parametrize("case", list(FAMILY_KINDS))
def test_cap_is_the_largest_member(case: PairCase) -> None:
    rng = np.random.default_rng(5)
    zs = np.sort(_legal_z(rng, case, 1.0, 2.0, 20))
    m = float(zs[-1])
    r_kind = FAMILY_KINDS[case][0]
    rs = CANONICAL_INTERVALS[r_kind].to_global(_inner_r(rng, 50))
    top = np.asarray(lambda_rs_apply(case, 1.0, 2.0, m, rs, m=m))
    for z in zs:
        assert np.all(np.asarray(lambda_rs_apply(case, 1.0, 2.0, float(z), rs, m=m)) <= top + 1e-15)


def test_evaluate_examples() -> None:
    assert evaluate(odot("odot2"), 0.5, 0.9) == pytest.approx(0.4, abs=1e-12)
    assert evaluate(odot("odot3"), 0.2, 0.9) == pytest.approx(1.0 / 6.0, abs=1e-12)
    for name in ("odot2", "odot3"):
        for b in (0.0, 0.2, 0.45, 0.8, 1.0):
            assert evaluate(odot(name), 1.0, b) == pytest.approx(b, abs=1e-12)


def test_shipped_specs_validate() -> None:
    assert validate_spec(odot("odot2")).ok
    assert validate_spec(odot("odot3")).ok


def test_case_table_of_odot3() -> None:
    rows = {(row["r"], row["t"]): row for row in case_table(odot("odot3"))}
    assert rows[(3, 3)]["case"] == PairCase.PROD_PROD.value
    assert rows[(3, 2)]["case"] == PairCase.PROD_RPROD.value
    assert rows[(3, 2)]["s"] == 0
    assert all(row["case"] != PairCase.IMPOSSIBLE.value for row in rows.values())


def test_validation_flags_small_alpha_under_lukasiewicz_filter() -> None:
    text = (SPEC_DIR / "odot2.spec").read_text(encoding="utf-8").replace("rho 1 3", "rho 1 0.5")
    spec = parse_spec(text, resolver=lambda name: load_spec(SPEC_DIR / name)).arch
    report = validate_spec(spec)
    assert not report.ok
    assert any("α ≥ 1 required" in message for message in report.messages())
    with pytest.raises(InvalidSpecError):
        evaluate(spec, 0.5, 0.5)


def test_validation_flags_impossible_combination() -> None:
    spec = parse_spec(IMPOSSIBLE_SPEC).arch
    report = validate_spec(spec)
    assert "impossible" in report.codes
    assert any("impossible combination" in message for message in report.messages())


def test_validation_flags_missing_family() -> None:
    text = (SPEC_DIR / "odot3.spec").read_text(encoding="utf-8")
    text = "\n".join(line for line in text.splitlines() if not line.startswith("pair 3 3"))
    report = validate_spec(parse_spec(text).arch)
    assert "missing" in report.codes


def test_verify_commuting() -> None:
    for name in ("odot2", "odot3"):
        report = verify_commuting(odot(name))
        assert report.passed, report
        assert report.samples == 50**3


def test_verify_commuting_on_single_class() -> None:
    spec = parse_spec("tomonoid 1\n0\npartition\n0 1 L R\nfilter lukasiewicz\n").arch
    assert validate_spec(spec).ok
    assert evaluate(spec, 0.7, 0.6) == pytest.approx(0.3)
    report = verify_commuting(spec, sample_count=1000)
    # Lukasiewicz sums are associative only up to rounding
    assert report.passed, report
    assert report.max_deviation < 1e-12
