from __future__ import annotations

from typing import Callable

import numpy as np

from src.models.coextension import AffineZMap, ArchCoextensionSpec, CoextensionSpec, PairContext, ParameterRange
from src.models.partition import ClassShape
from src.models.report import ValidationReport, Violation
from src.services.errors import ParameterRangeError
from src.services.finite_tomonoid import check_axioms
from src.services.interval_partition import validate as validate_partition
from src.services.quotient_structure import (
    ExpandedQuotient,
    FiniteQuotient,
    QuotientStructure,
    TnormFn,
    validate_expansion,
)

LocalMap = Callable[[np.ndarray, np.ndarray], np.ndarray]

CLAMP_WIDTH = 1e-12


def _clip_local(values: np.ndarray, where: str) -> np.ndarray:
    finite = values[np.isfinite(values)]
    if finite.size and (finite.min() < -CLAMP_WIDTH or finite.max() > 1.0 + CLAMP_WIDTH):
        worst = finite.min() if finite.min() < -CLAMP_WIDTH else finite.max()
        raise ParameterRangeError(f"{where}: local value {worst!r} leaves the canonical interval")
    if np.isnan(values).any():
        raise ParameterRangeError(f"{where}: formula produced NaN")
    return np.clip(values, 0.0, 1.0)


class CoextensionEngine:
    """Evaluates a coextension from its quotient, the filter operation and the per-class maps.

    Arguments are ordered so that hi >= lo; the class of hi supplies r, the class of lo
    supplies t. Pairs without an entry in pair_maps go to the bottom of the product class.
    """

    def __init__(
        self,
        structure: QuotientStructure,
        filter_op: LocalMap,
        class_actions: dict[int, LocalMap],
        pair_maps: dict[tuple[int, int], LocalMap],
    ) -> None:
        self.structure = structure
        self.filter_op = filter_op
        self.class_actions = class_actions
        self.pair_maps = pair_maps

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        if a_arr.size and (np.nanmin(a_arr) < 0.0 or np.nanmax(a_arr) > 1.0 or np.nanmin(b_arr) < 0.0 or np.nanmax(b_arr) > 1.0):
            raise ValueError("arguments must lie in [0, 1]")
        hi = np.maximum(a_arr, b_arr).ravel()
        lo = np.minimum(a_arr, b_arr).ravel()
        out = np.full(hi.shape, np.nan)

        c_r, r, p_r = self.structure.locate(hi)
        c_t, t, p_t = self.structure.locate(lo)
        classes = self.structure.classes
        top = self.structure.filter_index
        in_filter_r = c_r == top
        in_filter_t = c_t == top

        both = in_filter_r & in_filter_t
        if both.any():
            value = _clip_local(self.filter_op(r[both], t[both]), "filter")
            out[both] = classes[top].clamp(classes[top].to_global(value))

        acted = in_filter_r & ~in_filter_t
        out[acted] = lo[acted]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for index, action in self.class_actions.items():
                mask = acted & (c_t == index)
                if mask.any():
                    value = _clip_local(action(r[mask], t[mask]), f"class {index}")
                    out[mask] = classes[index].clamp(classes[index].to_global(value))

            rest = ~in_filter_r
            if rest.any():
                p_s = self.structure.base_product(p_r[rest], p_t[rest])
                cr_rest, ct_rest = c_r[rest], c_t[rest]
                c_s = self.structure.class_of_product(cr_rest, ct_rest, p_s)
                values = np.full(p_s.shape, np.nan)
                outside = c_s < 0
                values[outside] = self.structure.embed_base(p_s[outside])
                # a base product equal to a factor maps back to that argument itself
                hi_rest, lo_rest = hi[rest], lo[rest]
                same_t = outside & (p_s == p_t[rest])
                values[same_t] = lo_rest[same_t]
                same_r = outside & ~same_t & (p_s == p_r[rest])
                values[same_r] = hi_rest[same_r]
                for s_index in np.unique(c_s[~outside]):
                    values[c_s == s_index] = classes[int(s_index)].lo
                r_rest, t_rest = r[rest], t[rest]
                for (r_index, t_index), pair_map in self.pair_maps.items():
                    mask = (cr_rest == r_index) & (ct_rest == t_index) & ~outside
                    if not mask.any():
                        continue
                    for s_index in np.unique(c_s[mask]):
                        sub = mask & (c_s == s_index)
                        value = _clip_local(pair_map(r_rest[sub], t_rest[sub]), f"pair {r_index},{t_index}")
                        target = classes[int(s_index)]
                        values[sub] = target.clamp(target.to_global(value))
                out[rest] = values

        # 1 is the identity and 0 the bottom, whatever rounding the formulas carry
        out = np.where(hi == 1.0, lo, out)
        out = np.where(lo == 0.0, 0.0, out)

        if np.isnan(out).any():
            raise ParameterRangeError("evaluation left points undetermined")
        return out.reshape(a_arr.shape)


def evaluator_for(spec: CoextensionSpec) -> TnormFn:
    # the two builders import this module; resolve them at call time
    from src.services import arch_coextension, semilattice_coextension

    if isinstance(spec, ArchCoextensionSpec):
        return arch_coextension.as_tnorm(spec)
    return semilattice_coextension.as_tnorm(spec)


def structure_for(spec: CoextensionSpec) -> QuotientStructure:
    if spec.expansion is not None:
        base = evaluator_for(spec.expansion.base)
        return ExpandedQuotient(spec.partition, spec.expansion, base)
    return FiniteQuotient(spec.quotient, spec.partition)


def validate_any(spec: CoextensionSpec) -> ValidationReport:
    from src.services import arch_coextension, semilattice_coextension

    if isinstance(spec, ArchCoextensionSpec):
        return arch_coextension.validate_spec(spec)
    return semilattice_coextension.validate_spec(spec)


def validate_source(spec: CoextensionSpec) -> ValidationReport:
    """Partition, quotient table or base construction, and the filter class."""
    violations: list[Violation] = []
    if not spec.partition.classes:
        return ValidationReport((Violation("cover", "partition has no classes"),))
    if spec.expansion is None:
        report = validate_partition(spec.partition)
        axioms = check_axioms(spec.quotient.table)
        violations.extend(Violation("quotient", line) for line in axioms.lines())
        if len(spec.partition) != spec.quotient.n:
            violations.append(
                Violation("count", f"{len(spec.partition)} classes for a quotient of {spec.quotient.n} elements")
            )
    else:
        report = validate_expansion(spec.partition, spec.expansion)
        report = report.merged(validate_any(spec.expansion.base), prefix="base: ")
    if spec.partition.filter_class.is_singleton:
        violations.append(Violation("filter", "the filter class must not be a singleton", "filter"))
    return report.merged(ValidationReport(tuple(violations)))


def pair_contexts(structure: QuotientStructure) -> list[tuple[int, int, int, PairContext]]:
    """(R, T, S, context) for every R >= T below the filter whose product lands in a class."""
    rows: list[tuple[int, int, int, PairContext]] = []
    classes = structure.classes
    for r_index in range(structure.filter_index):
        for t_index in range(r_index + 1):
            s_index = structure.product_class(r_index, t_index)
            if s_index < 0:
                continue
            if classes[r_index].is_singleton:
                context = PairContext.SINGLETON_R
            elif classes[t_index].is_singleton:
                context = PairContext.SINGLETON_T
            elif classes[s_index].is_singleton:
                context = PairContext.SINGLETON_S
            elif not structure.is_maximal(r_index, t_index):
                context = PairContext.NON_MAXIMAL
            else:
                context = PairContext.MAXIMAL
            rows.append((r_index, t_index, s_index, context))
    return rows


def sample_points(shape: ClassShape, count: int = 5) -> np.ndarray:
    if shape.is_singleton:
        return np.array([shape.lo])
    inner = shape.to_global(np.linspace(0.0, 1.0, count + 2)[1:-1])
    ends = [value for value, closed in ((shape.lo, shape.left_closed), (shape.hi, shape.right_closed)) if closed]
    return np.concatenate([inner, np.array(ends, dtype=float)])


def check_consistency(structure: QuotientStructure, engine: CoextensionEngine) -> ValidationReport:
    """Products of sampled class members must stay in the class the quotient predicts."""
    violations: list[Violation] = []
    classes = structure.classes
    for r_index, r_shape in enumerate(classes):
        xs = sample_points(r_shape)
        for t_index in range(r_index + 1):
            s_index = structure.product_class(r_index, t_index)
            if s_index < 0:
                continue
            ys = sample_points(classes[t_index])
            a, b = np.meshgrid(xs, ys, indexing="ij")
            try:
                values = engine(a, b)
            except ParameterRangeError as exc:
                violations.append(Violation("range", str(exc), f"classes {r_index},{t_index}"))
                continue
            outside = ~classes[s_index].contains(values)
            if outside.any():
                i, j = (int(k) for k in np.argwhere(outside)[0])
                violations.append(
                    Violation(
                        "consistency",
                        f"product of classes {r_index},{t_index} leaves class {s_index}: {values[i, j]!r}",
                        f"{a[i, j]!r},{b[i, j]!r}",
                    )
                )
    return ValidationReport(tuple(violations))


def zmap_violation(params: ParameterRange, zmap: AffineZMap, t_shape: ClassShape, increasing: bool = True) -> str | None:
    """Checks the zmap range over T's local interval; closed bounds absorb excursions by clamping."""
    if increasing and zmap.c1 < 0:
        return "zmap must be non-decreasing"
    if not increasing and zmap.c1 > 0:
        return "zmap must be non-increasing"
    start, end = float(zmap(0.0)), float(zmap(1.0))
    low_value, low_included = (start, t_shape.left_closed) if increasing else (end, t_shape.right_closed)
    high_value, high_included = (end, t_shape.right_closed) if increasing else (start, t_shape.left_closed)
    if zmap.c1 == 0:
        low_included = high_included = True
    if not params.low_closed:
        if low_value < params.low or (low_value == params.low and low_included):
            return f"zmap reaches {low_value:g}, outside {params.describe()}"
    if not params.high_closed:
        if high_value > params.high or (high_value == params.high and high_included):
            return f"zmap reaches {high_value:g}, outside {params.describe()}"
    return None
