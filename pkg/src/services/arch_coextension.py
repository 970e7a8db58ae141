from __future__ import annotations

from functools import lru_cache, partial
from typing import Any, Callable

import numpy as np

from src.models.coextension import (
    ARCHIMEDEAN_FAMILIES,
    ArchCoextensionSpec,
    FilterKind,
    PairCase,
    PairContext,
    ParameterRange,
)
from src.models.partition import ClassShape, CompositionKind
from src.models.report import GridReport, ValidationReport, Violation
from src.services.coextension_engine import (
    CoextensionEngine,
    LocalMap,
    check_consistency,
    pair_contexts,
    structure_for,
    validate_source,
    zmap_violation,
)
from src.services.errors import IllegalCombinationError, InvalidSpecError, ParameterRangeError
from src.services.interval_partition import archimedean_kind
from src.services.quotient_structure import QuotientStructure, TnormFn
from src.utils.logger import get_app_logger

LUK = CompositionKind.LUKASIEWICZ
PROD = CompositionKind.PRODUCT
RPROD = CompositionKind.REVERSED_PRODUCT
POWER = CompositionKind.POWER
SINGLETON = CompositionKind.TRIVIAL_SINGLETON

FAMILY_KINDS: dict[PairCase, tuple[CompositionKind, CompositionKind]] = {
    PairCase.LUK_LUK: (LUK, LUK),
    PairCase.LUK_RPROD: (LUK, RPROD),
    PairCase.PROD_LUK: (PROD, LUK),
    PairCase.PROD_PROD: (PROD, PROD),
    PairCase.PROD_RPROD: (PROD, RPROD),
    PairCase.PROD_POWER: (PROD, POWER),
    PairCase.RPROD_RPROD: (RPROD, RPROD),
    PairCase.POWER_RPROD: (POWER, RPROD),
    PairCase.POWER_POWER: (POWER, POWER),
}
_FAMILY_BY_KINDS = {kinds: case for case, kinds in FAMILY_KINDS.items()}
IMPOSSIBLE_KINDS = frozenset({(LUK, PROD), (LUK, POWER), (RPROD, PROD), (RPROD, POWER), (POWER, PROD)})
TRIVIAL_KINDS = frozenset({(RPROD, LUK), (POWER, LUK)})

# lower bound of z, and the interval the cap m may be chosen from, as functions of k = alpha_S / alpha_R
_BOUNDS: dict[PairCase, Callable[[float], tuple[float, bool, float, bool]]] = {
    PairCase.LUK_LUK: lambda k: (-k, True, min(1.0 - k, 0.0), True),
    PairCase.LUK_RPROD: lambda k: (-1.0, True, 0.0, True),
    PairCase.PROD_LUK: lambda k: (0.0, True, 1.0, True),
    PairCase.PROD_PROD: lambda k: (0.0, False, 1.0, True),
    PairCase.PROD_RPROD: lambda k: (1.0, True, np.inf, False),
    PairCase.PROD_POWER: lambda k: (0.0, False, 1.0, False),
    PairCase.RPROD_RPROD: lambda k: (0.0, False, 1.0, True),
    PairCase.POWER_RPROD: lambda k: (0.0, False, np.inf, False),
    PairCase.POWER_POWER: lambda k: (0.0, False, 1.0, False),
}

CANONICAL_INTERVALS: dict[CompositionKind, ClassShape] = {
    LUK: ClassShape(0.0, 1.0, True, True),
    PROD: ClassShape(0.0, 1.0, False, True),
    RPROD: ClassShape(0.0, 1.0, True, False),
    POWER: ClassShape(0.0, 1.0, False, False),
    SINGLETON: ClassShape.point(0.0),
}


def _plain(values: np.ndarray) -> Any:
    return float(values) if np.ndim(values) == 0 else values


def filter_op(kind: FilterKind, f: Any, g: Any) -> Any:
    f_arr = np.asarray(f, dtype=float)
    g_arr = np.asarray(g, dtype=float)
    if FilterKind(kind) is FilterKind.LUKASIEWICZ:
        return _plain(np.maximum(f_arr + (g_arr - 1.0), 0.0))
    return _plain(f_arr * g_arr)


def _check_alpha(alpha: float, filter_kind: FilterKind) -> None:
    if not alpha > 0:
        raise IllegalCombinationError(f"alpha must be positive, got {alpha}")
    if filter_kind is FilterKind.LUKASIEWICZ and alpha < 1:
        raise IllegalCombinationError(f"α ≥ 1 required under a Łukasiewicz filter, got {alpha}")


def _rho_formula(class_kind: CompositionKind, filter_kind: FilterKind, alpha: float) -> LocalMap:
    if class_kind is SINGLETON:
        return lambda f, r: np.asarray(r, dtype=float)
    if filter_kind is FilterKind.LUKASIEWICZ:
        if class_kind is not LUK:
            raise IllegalCombinationError(f"a Łukasiewicz filter cannot act on a {class_kind.value} class")
        return lambda f, r: np.maximum(r + alpha * (f - 1.0), 0.0)
    if class_kind is LUK:
        return lambda f, r: np.maximum(r + alpha * np.log(f), 0.0)
    if class_kind is PROD:
        return lambda f, r: f**alpha * r
    if class_kind is RPROD:
        return lambda f, r: np.maximum(1.0 - (1.0 - r) / f**alpha, 0.0)
    if class_kind is POWER:
        return lambda f, r: r ** (1.0 / f**alpha)
    raise IllegalCombinationError(f"{class_kind.value} is not an Archimedean kind")


def rho_apply(class_kind: CompositionKind, filter_kind: FilterKind, alpha: float, f: Any, r: Any) -> Any:
    """Action of the filter element f on the local coordinate r of a class."""
    filter_kind = FilterKind(filter_kind)
    _check_alpha(alpha, filter_kind)
    formula = _rho_formula(CompositionKind(class_kind), filter_kind, alpha)
    with np.errstate(divide="ignore"):
        return _plain(formula(np.asarray(f, dtype=float), np.asarray(r, dtype=float)))


def pair_case(
    r_kind: CompositionKind,
    s_kind: CompositionKind,
    filter_kind: FilterKind,
    context: PairContext,
) -> PairCase:
    if PairContext(context) is not PairContext.MAXIMAL:
        return PairCase.TRIVIAL
    if SINGLETON in (r_kind, s_kind):
        return PairCase.TRIVIAL
    if FilterKind(filter_kind) is FilterKind.LUKASIEWICZ and (r_kind, s_kind) != (LUK, LUK):
        return PairCase.IMPOSSIBLE
    if (r_kind, s_kind) in IMPOSSIBLE_KINDS:
        return PairCase.IMPOSSIBLE
    if (r_kind, s_kind) in TRIVIAL_KINDS:
        return PairCase.TRIVIAL
    return _FAMILY_BY_KINDS[(r_kind, s_kind)]


def parameter_range(case: PairCase, alpha_r: float, alpha_s: float, m: float | None = None) -> ParameterRange:
    """Legal z for a family: from its lower bound up to the cap m (or the largest cap when m is None)."""
    case = PairCase(case)
    if case not in _BOUNDS:
        raise IllegalCombinationError(f"{case.value} is not an Archimedean family")
    low, low_closed, cap, cap_closed = _BOUNDS[case](alpha_s / alpha_r)
    if m is None:
        return ParameterRange(low, low_closed, cap, cap_closed)
    caps = ParameterRange(low, low_closed, cap, cap_closed)
    if not caps.contains(m):
        raise ParameterRangeError(f"cap m={m:g} outside {caps.describe()} for {case.value}")
    return ParameterRange(low, low_closed, float(m), True)


def _family_formula(case: PairCase, k: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if case is PairCase.LUK_LUK:
        return lambda z, r: np.maximum(k * r + z, 0.0)
    if case is PairCase.LUK_RPROD:
        return lambda z, r: np.maximum(1.0 - np.exp(-k * (r + z)), 0.0)
    if case is PairCase.PROD_LUK:
        return lambda z, r: np.maximum(k * np.log(r) + z, 0.0)
    if case is PairCase.PROD_PROD:
        return lambda z, r: z * r**k
    if case is PairCase.PROD_RPROD:
        return lambda z, r: np.maximum(1.0 - 1.0 / (z * r**k), 0.0)
    if case is PairCase.PROD_POWER:
        return lambda z, r: z ** (r ** (-k))
    if case is PairCase.RPROD_RPROD:
        return lambda z, r: np.maximum(1.0 - (1.0 - r) ** k / z, 0.0)
    if case is PairCase.POWER_RPROD:
        return lambda z, r: np.maximum(1.0 - (-np.log(r)) ** k / z, 0.0)
    if case is PairCase.POWER_POWER:
        return lambda z, r: z ** ((-np.log(r)) ** k)
    raise IllegalCombinationError(f"{case.value} is not an Archimedean family")


def lambda_rs_apply(
    case: PairCase,
    alpha_r: float,
    alpha_s: float,
    z: float,
    r: Any,
    m: float | None = None,
) -> Any:
    """Member of the family selected by z, applied to the local coordinate r of R."""
    case = PairCase(case)
    if case not in ARCHIMEDEAN_FAMILIES:
        raise IllegalCombinationError(f"{case.value} is not an Archimedean family")
    if not (alpha_r > 0 and alpha_s > 0):
        raise IllegalCombinationError("alpha must be positive")
    params = parameter_range(case, alpha_r, alpha_s, m)
    if not params.contains(z):
        raise ParameterRangeError(f"z={z:g} outside {params.describe()} for {case.value}")
    r_arr = np.asarray(r, dtype=float)
    r_kind = FAMILY_KINDS[case][0]
    if not CANONICAL_INTERVALS[r_kind].contains(r_arr).all():
        raise ParameterRangeError(f"r outside the canonical interval of a {r_kind.value} class")
    formula = _family_formula(case, alpha_s / alpha_r)
    with np.errstate(divide="ignore", over="ignore"):
        return _plain(formula(np.float64(z), r_arr))


def _pair_map(case: PairCase, k: float, params: ParameterRange, zmap: Callable[[Any], np.ndarray]) -> LocalMap:
    formula = _family_formula(case, k)

    def apply(r: np.ndarray, t: np.ndarray) -> np.ndarray:
        return formula(params.clamp(zmap(t)), r)

    return apply


def kinds_of(spec: ArchCoextensionSpec) -> list[CompositionKind]:
    return [archimedean_kind(shape) for shape in spec.partition.classes]


def _combined_case(
    kinds: list[CompositionKind],
    filter_kind: FilterKind,
    r_index: int,
    t_index: int,
    s_index: int,
    context: PairContext,
) -> PairCase:
    forward = pair_case(kinds[r_index], kinds[s_index], filter_kind, context)
    if context is not PairContext.MAXIMAL:
        return forward
    # the same products seen from T: lambda_r maps T into S
    backward = pair_case(kinds[t_index], kinds[s_index], filter_kind, context)
    if PairCase.IMPOSSIBLE in (forward, backward):
        return PairCase.IMPOSSIBLE
    if PairCase.TRIVIAL in (forward, backward):
        return PairCase.TRIVIAL
    return forward


def _case_rows(spec: ArchCoextensionSpec, structure: QuotientStructure) -> list[dict[str, Any]]:
    kinds = kinds_of(spec)
    rows = []
    for r_index, t_index, s_index, context in pair_contexts(structure):
        case = _combined_case(kinds, spec.filter_kind, r_index, t_index, s_index, context)
        given = spec.pair_for(r_index, t_index)
        rows.append(
            {
                "r": r_index,
                "t": t_index,
                "s": s_index,
                "r_kind": kinds[r_index].value,
                "s_kind": kinds[s_index].value,
                "context": context.value,
                "case": case.value,
                "given": given.case.value if given is not None else "",
            }
        )
    return rows


def _compile_unchecked(spec: ArchCoextensionSpec) -> CoextensionEngine:
    structure = structure_for(spec)
    kinds = kinds_of(spec)
    top = structure.filter_index
    actions: dict[int, LocalMap] = {}
    for index in range(top):
        if kinds[index] is SINGLETON:
            continue
        alpha = spec.alpha_for(index)
        if alpha is None:
            raise IllegalCombinationError(f"class {index} has no rho assignment")
        actions[index] = _rho_formula(kinds[index], spec.filter_kind, alpha)
    pair_maps: dict[tuple[int, int], LocalMap] = {}
    for pair in spec.pairs:
        if not pair.case.is_family:
            continue
        s_index = structure.product_class(pair.r_index, pair.t_index)
        alpha_r = spec.alpha_for(pair.r_index)
        alpha_s = spec.alpha_for(s_index)
        if alpha_r is None or alpha_s is None:
            raise IllegalCombinationError(f"pair {pair.r_index},{pair.t_index} needs rho on R and S")
        params = parameter_range(pair.case, alpha_r, alpha_s, pair.m)
        pair_maps[pair.key] = _pair_map(pair.case, alpha_s / alpha_r, params, pair.zmap)
    kind = spec.filter_kind
    return CoextensionEngine(structure, lambda f, g: np.asarray(filter_op(kind, f, g)), actions, pair_maps)


@lru_cache(maxsize=64)
def _compiled(spec: ArchCoextensionSpec) -> CoextensionEngine:
    engine = _compile_unchecked(spec)
    get_app_logger().info(
        "BUILD arch classes=%d pairs=%d filter=%s", len(spec.partition), len(engine.pair_maps), spec.filter_kind.value
    )
    return engine


def _check_classes(spec: ArchCoextensionSpec, kinds: list[CompositionKind]) -> list[Violation]:
    violations: list[Violation] = []
    top = len(kinds) - 1
    filter_shape = spec.partition.filter_class
    luk_filter = spec.filter_kind is FilterKind.LUKASIEWICZ
    if not filter_shape.right_closed:
        violations.append(Violation("filter", "the filter class must contain 1", "filter"))
    if filter_shape.left_closed != luk_filter:
        expected = "left-closed" if luk_filter else "left-open"
        violations.append(
            Violation("filter", f"a {spec.filter_kind.value} filter class must be {expected}", filter_shape.describe())
        )
    for index, kind in enumerate(kinds[:top]):
        where = f"class {index}"
        alpha = spec.alpha_for(index)
        if kind is SINGLETON:
            if alpha is not None:
                violations.append(Violation("rho", "singleton classes take no rho assignment", where))
            continue
        if luk_filter and kind is not LUK:
            violations.append(
                Violation("kind", f"a Łukasiewicz filter cannot act on a {kind.value} class", where)
            )
        if alpha is None:
            violations.append(Violation("rho", "missing rho assignment", where))
        elif luk_filter and alpha < 1:
            violations.append(Violation("rho", f"α ≥ 1 required under a Łukasiewicz filter, got {alpha:g}", where))
    for item in spec.rho:
        if not 0 <= item.class_index < top:
            violations.append(Violation("rho", "rho assigned outside the classes below the filter", f"class {item.class_index}"))
    return violations


def _check_pairs(
    spec: ArchCoextensionSpec,
    structure: QuotientStructure,
    kinds: list[CompositionKind],
) -> list[Violation]:
    violations: list[Violation] = []
    seen: set[tuple[int, int]] = set()
    classes = structure.classes
    for row in _case_rows(spec, structure):
        r_index, t_index, s_index = row["r"], row["t"], row["s"]
        key = (r_index, t_index)
        seen.add(key)
        where = f"pair {r_index},{t_index}"
        case = PairCase(row["case"])
        given = spec.pair_for(r_index, t_index)
        if case is PairCase.IMPOSSIBLE:
            violations.append(
                Violation(
                    "impossible",
                    f"impossible combination {kinds[r_index].value}/{kinds[t_index].value} into {kinds[s_index].value}",
                    where,
                )
            )
            continue
        if not case.is_family:
            if given is not None and given.case is not PairCase.TRIVIAL:
                violations.append(Violation("case", f"pair is trivial, got {given.case.value}", where))
            if not classes[s_index].has_min:
                violations.append(Violation("bottom", f"class {s_index} has no smallest element", where))
            continue
        if given is None:
            violations.append(Violation("missing", f"pair needs a {case.value} family", where))
            continue
        if given.case is not case:
            violations.append(Violation("case", f"expected {case.value}, got {given.case.value}", where))
            continue
        alpha_r, alpha_s = spec.alpha_for(r_index), spec.alpha_for(s_index)
        if alpha_r is None or alpha_s is None:
            continue
        try:
            params = parameter_range(case, alpha_r, alpha_s, given.m)
        except ParameterRangeError as exc:
            violations.append(Violation("m", str(exc), where))
            continue
        problem = zmap_violation(params, given.zmap, classes[t_index])
        if problem:
            violations.append(Violation("zmap", problem, where))
    for pair in spec.pairs:
        if pair.key not in seen:
            violations.append(Violation("pair", "no such class pair below the filter", f"pair {pair.r_index},{pair.t_index}"))
    return violations


@lru_cache(maxsize=64)
def validate_spec(spec: ArchCoextensionSpec) -> ValidationReport:
    report = validate_source(spec)
    if not report.ok:
        return report
    kinds = kinds_of(spec)
    structure = structure_for(spec)
    violations = _check_classes(spec, kinds)
    if not violations:
        violations.extend(_check_pairs(spec, structure, kinds))
    report = report.merged(ValidationReport(tuple(violations)))
    if report.ok:
        try:
            report = report.merged(check_consistency(structure, _compile_unchecked(spec)))
        except (IllegalCombinationError, ParameterRangeError) as exc:
            report = report.merged(ValidationReport((Violation("range", str(exc)),)))
    return report


def case_table(spec: ArchCoextensionSpec) -> list[dict[str, Any]]:
    """The case assignment for every class pair below the filter."""
    report = validate_source(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    return _case_rows(spec, structure_for(spec))


def evaluate_many(spec: ArchCoextensionSpec, a: Any, b: Any) -> np.ndarray:
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    return _compiled(spec)(a, b)


def evaluate(spec: ArchCoextensionSpec, a: float, b: float) -> float:
    return float(evaluate_many(spec, np.array([a]), np.array([b]))[0])


def as_tnorm(spec: ArchCoextensionSpec) -> TnormFn:
    return partial(evaluate_many, spec)


def verify_commuting(spec: ArchCoextensionSpec, sample_count: int = 50**3, tol: float = 1e-9) -> GridReport:
    """Compares (r*t)*f with r*(t*f) for random r, t and f drawn from the filter class."""
    fn = as_tnorm(spec)
    rng = np.random.default_rng(0)
    r = rng.random(sample_count)
    t = rng.random(sample_count)
    f = spec.partition.filter_class.to_global(1.0 - rng.random(sample_count))
    first = fn(fn(r, t), f)
    second = fn(r, fn(t, f))
    deviation = np.abs(first - second)
    worst = int(np.argmax(deviation)) if sample_count else 0
    return GridReport(
        axiom="commuting",
        max_deviation=float(deviation[worst]) if sample_count else 0.0,
        witness=(float(r[worst]), float(t[worst]), float(f[worst])) if sample_count else (),
        samples=sample_count,
        tolerance=tol,
    )
