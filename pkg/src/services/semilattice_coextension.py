from __future__ import annotations

from functools import lru_cache, partial
from typing import Any

import numpy as np

from src.models.coextension import (
    SEMILATTICE_FAMILIES,
    FixpointSet,
    PairCase,
    PairContext,
    ParameterRange,
    SemiCoextensionSpec,
)
from src.models.partition import ClassShape, CompositionKind, Orientation
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
from src.services.interval_partition import semilattice_kind
from src.services.quotient_structure import QuotientStructure, TnormFn
from src.utils.logger import get_app_logger

GOEDEL = CompositionKind.GOEDEL
RGOEDEL = CompositionKind.REVERSED_GOEDEL
SINGLETON = CompositionKind.TRIVIAL_SINGLETON


def _plain(values: np.ndarray) -> Any:
    return float(values) if np.ndim(values) == 0 else values


def idempotent_apply(fixpoints: FixpointSet, a: Any) -> Any:
    """The idempotent translation with the given fixpoints: largest member not above a."""
    return _plain(fixpoints.max_at_most(a))


def validate_E(fixpoints: FixpointSet) -> ValidationReport:
    violations: list[Violation] = []
    host = fixpoints.host
    components = fixpoints.components
    if not components:
        return ValidationReport((Violation("E3", "no member below any element", f"{host.lo:g}"),))

    for shape in components:
        if shape.right_closed:
            continue
        top = shape.hi
        if top == host.hi and not host.right_closed:
            continue
        if not fixpoints.contains(top):
            violations.append(Violation("E1", f"supremum {top:g} of members is not a member", f"{top:g}"))

    for prev, shape in zip((None,) + components[:-1], components):
        if not shape.left_closed or shape.lo <= host.lo:
            continue
        if prev is None or prev.hi != shape.lo:
            violations.append(
                Violation("E2", f"member {shape.lo:g} is not the supremum of smaller members", f"{shape.lo:g}")
            )

    first = components[0]
    if first.lo > host.lo:
        witness = 0.5 * (host.lo + first.lo)
        violations.append(Violation("E3", f"no member below {witness:g}", f"{witness:g}"))
    elif host.left_closed and not first.left_closed:
        violations.append(Violation("E3", f"no member below {host.lo:g}", f"{host.lo:g}"))
    return ValidationReport(tuple(violations))


def _local_host(shape: ClassShape) -> ClassShape:
    return ClassShape(0.0, 1.0, shape.left_closed, shape.right_closed)


def fixpoint_set(orientation: Orientation, f: float, shape: ClassShape) -> FixpointSet:
    """Fixpoints of the action of the filter element f on a class, in local coordinates."""
    host = _local_host(shape)
    if Orientation(orientation) is Orientation.PRESERVING:
        if f == 0.0 and not shape.left_closed:
            return FixpointSet((), host)
        return FixpointSet((ClassShape(0.0, f, shape.left_closed, f < 1.0 or shape.right_closed),), host)
    if not shape.left_closed:
        raise IllegalCombinationError(f"reversing orientation needs a smallest element, {shape.describe()} has none")
    cut = 1.0 - f
    upper = () if cut >= 1.0 else (ClassShape(cut, 1.0, False, shape.right_closed),)
    if cut == 0.0:
        return FixpointSet((ClassShape(0.0, 1.0, True, shape.right_closed),), host)
    return FixpointSet((ClassShape.point(0.0),) + upper, host)


def goedel_apply(orientation: Orientation, f: Any, r: Any, shape: ClassShape | None = None) -> Any:
    f_arr = np.asarray(f, dtype=float)
    r_arr = np.asarray(r, dtype=float)
    if Orientation(orientation) is Orientation.PRESERVING:
        return _plain(np.minimum(r_arr, f_arr))
    if shape is not None and not shape.left_closed:
        raise IllegalCombinationError(f"reversing orientation needs a smallest element, {shape.describe()} has none")
    return _plain(np.where(r_arr <= 1.0 - f_arr, 0.0, r_arr))


def pair_case_semilattice(r_kind: CompositionKind, s_kind: CompositionKind, context: PairContext) -> PairCase:
    if PairContext(context) is not PairContext.MAXIMAL:
        return PairCase.TRIVIAL
    if SINGLETON in (r_kind, s_kind):
        return PairCase.TRIVIAL
    cases = {
        (GOEDEL, GOEDEL): PairCase.GOEDEL_GOEDEL,
        (GOEDEL, RGOEDEL): PairCase.GOEDEL_RGOEDEL,
        (RGOEDEL, RGOEDEL): PairCase.RGOEDEL_RGOEDEL,
        (RGOEDEL, GOEDEL): PairCase.TRIVIAL,
    }
    if (r_kind, s_kind) not in cases:
        raise IllegalCombinationError(f"{r_kind.value}/{s_kind.value} are not semilattice kinds")
    return cases[(r_kind, s_kind)]


def semilattice_range(case: PairCase, m: float | None = None) -> ParameterRange:
    """Gödel pairs take z <= m; reversed-Gödel pairs decrease in z and take z >= m."""
    case = PairCase(case)
    if case not in SEMILATTICE_FAMILIES:
        raise IllegalCombinationError(f"{case.value} is not a semilattice family")
    if m is not None and not 0.0 <= m <= 1.0:
        raise ParameterRangeError(f"cap m={m:g} outside [0, 1] for {case.value}")
    if case is PairCase.GOEDEL_GOEDEL:
        return ParameterRange(0.0, True, 1.0 if m is None else m, True)
    if case is PairCase.RGOEDEL_RGOEDEL:
        return ParameterRange(0.0 if m is None else m, True, 1.0, True)
    return ParameterRange(0.0, True, 1.0, True)


def _family_formula(case: PairCase):
    if case is PairCase.GOEDEL_GOEDEL:
        return lambda z, r: np.minimum(r, z)
    if case is PairCase.GOEDEL_RGOEDEL:
        return lambda z, r: np.where(r <= 1.0 - z, 0.0, z)
    return lambda z, r: np.where(r <= z, 0.0, r)


def lambda_rs_semilattice(
    case: PairCase,
    z: float,
    r: Any,
    m: float | None = None,
    sprime: FixpointSet | None = None,
) -> Any:
    case = PairCase(case)
    params = semilattice_range(case, m)
    if not params.contains(z):
        raise ParameterRangeError(f"z={z:g} outside {params.describe()} for {case.value}")
    if case is PairCase.GOEDEL_RGOEDEL and sprime is not None and not sprime.contains(z):
        raise ParameterRangeError(f"z={z:g} is not in the parameter set")
    return _plain(_family_formula(case)(np.float64(z), np.asarray(r, dtype=float)))


def _pair_map(case: PairCase, params: ParameterRange, zmap, sprime: FixpointSet | None) -> LocalMap:
    formula = _family_formula(case)

    def apply(r: np.ndarray, t: np.ndarray) -> np.ndarray:
        z = np.clip(zmap(t), params.low, params.high)
        if sprime is not None:
            z = sprime.sup_below(z)
        return formula(z, r)

    return apply


def kinds_of(spec: SemiCoextensionSpec) -> list[CompositionKind | None]:
    """None marks a class whose kind cannot be decided (missing or illegal orientation)."""
    classes = spec.partition.classes
    kinds: list[CompositionKind | None] = []
    for index, shape in enumerate(classes):
        if index == len(classes) - 1:
            kinds.append(GOEDEL)
            continue
        if shape.is_singleton:
            kinds.append(SINGLETON)
            continue
        orientation = spec.orientation_for(index)
        if orientation is None:
            kinds.append(None)
            continue
        try:
            kinds.append(semilattice_kind(shape, orientation))
        except IllegalCombinationError:
            kinds.append(None)
    return kinds


def _combined_case(kinds: list[CompositionKind], r_index: int, t_index: int, s_index: int, context: PairContext) -> PairCase:
    forward = pair_case_semilattice(kinds[r_index], kinds[s_index], context)
    if context is not PairContext.MAXIMAL:
        return forward
    backward = pair_case_semilattice(kinds[t_index], kinds[s_index], context)
    if PairCase.TRIVIAL in (forward, backward):
        return PairCase.TRIVIAL
    return forward


def _case_rows(spec: SemiCoextensionSpec, structure: QuotientStructure) -> list[dict[str, Any]]:
    kinds = kinds_of(spec)
    rows = []
    for r_index, t_index, s_index, context in pair_contexts(structure):
        if None in (kinds[r_index], kinds[t_index], kinds[s_index]):
            continue
        case = _combined_case(kinds, r_index, t_index, s_index, context)
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


def _action(orientation: Orientation) -> LocalMap:
    if orientation is Orientation.PRESERVING:
        return lambda f, r: np.minimum(r, f)
    return lambda f, r: np.where(r <= 1.0 - f, 0.0, r)


def _compile_unchecked(spec: SemiCoextensionSpec) -> CoextensionEngine:
    structure = structure_for(spec)
    top = structure.filter_index
    actions: dict[int, LocalMap] = {}
    for index in range(top):
        if structure.classes[index].is_singleton:
            continue
        orientation = spec.orientation_for(index)
        if orientation is None:
            raise IllegalCombinationError(f"class {index} has no orientation")
        actions[index] = _action(orientation)
    pair_maps: dict[tuple[int, int], LocalMap] = {}
    for pair in spec.pairs:
        if not pair.case.is_family:
            continue
        params = semilattice_range(pair.case, pair.m)
        pair_maps[pair.key] = _pair_map(pair.case, params, pair.zmap, pair.sprime)
    return CoextensionEngine(structure, np.minimum, actions, pair_maps)


@lru_cache(maxsize=64)
def _compiled(spec: SemiCoextensionSpec) -> CoextensionEngine:
    engine = _compile_unchecked(spec)
    get_app_logger().info("BUILD semilattice classes=%d pairs=%d", len(spec.partition), len(engine.pair_maps))
    return engine


def _check_classes(spec: SemiCoextensionSpec) -> list[Violation]:
    violations: list[Violation] = []
    classes = spec.partition.classes
    top = len(classes) - 1
    filter_shape = classes[top]
    if not filter_shape.right_closed:
        violations.append(Violation("filter", "the filter class must contain 1", "filter"))
    for index, shape in enumerate(classes[:top]):
        where = f"class {index}"
        orientation = spec.orientation_for(index)
        if shape.is_singleton:
            if orientation is not None:
                violations.append(Violation("nu", "singleton classes take no orientation", where))
            continue
        if orientation is None:
            violations.append(Violation("nu", "missing orientation", where))
            continue
        if orientation is Orientation.PRESERVING:
            if shape.left_closed != filter_shape.left_closed or not shape.right_closed:
                violations.append(
                    Violation("shape", f"a preserving class must have the filter's shape, got {shape.describe()}", where)
                )
        elif not shape.left_closed or shape.right_closed != filter_shape.left_closed:
            violations.append(
                Violation("shape", f"a reversing class must mirror the filter's shape, got {shape.describe()}", where)
            )
    for item in spec.nu:
        if not 0 <= item.class_index < top:
            violations.append(Violation("nu", "orientation assigned outside the classes below the filter", f"class {item.class_index}"))
    return violations


def _check_pairs(spec: SemiCoextensionSpec, structure: QuotientStructure) -> list[Violation]:
    violations: list[Violation] = []
    seen: set[tuple[int, int]] = set()
    classes = structure.classes
    for row in _case_rows(spec, structure):
        r_index, t_index, s_index = row["r"], row["t"], row["s"]
        seen.add((r_index, t_index))
        where = f"pair {r_index},{t_index}"
        case = PairCase(row["case"])
        given = spec.pair_for(r_index, t_index)
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
        try:
            params = semilattice_range(case, given.m)
        except ParameterRangeError as exc:
            violations.append(Violation("m", str(exc), where))
            continue
        problem = zmap_violation(params, given.zmap, classes[t_index], increasing=case is not PairCase.RGOEDEL_RGOEDEL)
        if problem:
            violations.append(Violation("zmap", problem, where))
        if case is PairCase.GOEDEL_RGOEDEL and given.sprime is not None:
            if not given.sprime.contains(0.0):
                violations.append(Violation("sprime", "the parameter set must contain 0", where))
            for item in validate_E(given.sprime):
                if item.code == "E1":
                    violations.append(Violation("sprime", item.message, where))
    for pair in spec.pairs:
        if pair.key not in seen:
            violations.append(Violation("pair", "no such class pair below the filter", f"pair {pair.r_index},{pair.t_index}"))
    return violations


@lru_cache(maxsize=64)
def validate_spec(spec: SemiCoextensionSpec) -> ValidationReport:
    report = validate_source(spec)
    if not report.ok:
        return report
    violations = _check_classes(spec)
    if not violations:
        violations.extend(_check_pairs(spec, structure_for(spec)))
    report = report.merged(ValidationReport(tuple(violations)))
    if report.ok:
        try:
            report = report.merged(check_consistency(structure_for(spec), _compile_unchecked(spec)))
        except (IllegalCombinationError, ParameterRangeError) as exc:
            report = report.merged(ValidationReport((Violation("range", str(exc)),)))
    return report


def case_table(spec: SemiCoextensionSpec) -> list[dict[str, Any]]:
    report = validate_source(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    return _case_rows(spec, structure_for(spec))


def evaluate_many(spec: SemiCoextensionSpec, a: Any, b: Any) -> np.ndarray:
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    return _compiled(spec)(a, b)


def evaluate(spec: SemiCoextensionSpec, a: float, b: float) -> float:
    return float(evaluate_many(spec, np.array([a]), np.array([b]))[0])


def as_tnorm(spec: SemiCoextensionSpec) -> TnormFn:
    return partial(evaluate_many, spec)


def verify_idempotency(spec: SemiCoextensionSpec, sample_count: int = 10_000, tol: float = 1e-12) -> GridReport:
    """Every filter element must act idempotently: f*(f*x) = f*x."""
    fn = as_tnorm(spec)
    rng = np.random.default_rng(0)
    f = spec.partition.filter_class.to_global(1.0 - rng.random(sample_count))
    x = rng.random(sample_count)
    once = fn(f, x)
    deviation = np.abs(fn(f, once) - once)
    worst = int(np.argmax(deviation)) if sample_count else 0
    return GridReport(
        axiom="idempotency",
        max_deviation=float(deviation[worst]) if sample_count else 0.0,
        witness=(float(f[worst]), float(x[worst])) if sample_count else (),
        samples=sample_count,
        tolerance=tol,
    )
