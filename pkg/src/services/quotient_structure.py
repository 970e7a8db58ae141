from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from src.models.coextension import BaseExpansion
from src.models.partition import ClassShape, IntervalPartition
from src.models.report import ValidationReport, Violation
from src.models.tomonoid import FiniteTomonoid
from src.services.finite_tomonoid import is_maximal_pair
from src.services.interval_partition import locate_many

TnormFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

BASE_POINT_TOL = 1e-12
RESIDUUM_STEPS = 60


class QuotientStructure(Protocol):
    """What the evaluator needs to know about the quotient a coextension is built over."""

    classes: tuple[ClassShape, ...]
    filter_index: int

    def locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...

    def base_product(self, pa: np.ndarray, pb: np.ndarray) -> np.ndarray: ...

    def class_of_base(self, ps: np.ndarray) -> np.ndarray: ...

    def class_of_product(self, c_r: np.ndarray, c_t: np.ndarray, ps: np.ndarray) -> np.ndarray: ...

    def embed_base(self, ps: np.ndarray) -> np.ndarray: ...

    def product_class(self, i: int, j: int) -> int: ...

    def is_maximal(self, i: int, j: int) -> bool: ...


class FiniteQuotient:
    """Every element of the finite quotient owns one class of the partition."""

    def __init__(self, tomonoid: FiniteTomonoid, partition: IntervalPartition) -> None:
        self.tomonoid = tomonoid
        self.partition = partition
        self.classes = partition.classes
        self.filter_index = len(partition.classes) - 1
        self._table = tomonoid.array

    def locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        index, local = locate_many(self.partition, x)
        return index, local, index.astype(float)

    def base_product(self, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
        return self._table[pa.astype(int), pb.astype(int)].astype(float)

    def class_of_base(self, ps: np.ndarray) -> np.ndarray:
        return ps.astype(int)

    def class_of_product(self, c_r: np.ndarray, c_t: np.ndarray, ps: np.ndarray) -> np.ndarray:
        return ps.astype(int)

    def embed_base(self, ps: np.ndarray) -> np.ndarray:
        return np.full(np.shape(ps), np.nan)

    def product_class(self, i: int, j: int) -> int:
        return self.tomonoid.table[i][j]

    def is_maximal(self, i: int, j: int) -> bool:
        return is_maximal_pair(self.tomonoid, i, j)


class ExpandedQuotient:
    """A built t-norm whose listed points are blown up into intervals.

    Points that are not expanded stay singleton classes; they fill the gaps between
    the expanded intervals through piecewise affine maps.
    """

    def __init__(self, partition: IntervalPartition, expansion: BaseExpansion, base: TnormFn) -> None:
        self.partition = partition
        self.expansion = expansion
        self.classes = partition.classes
        self.filter_index = len(partition.classes) - 1
        self.points = np.array(expansion.points, dtype=float)
        self._base = base
        self._gaps: list[tuple[float, float, float, float, bool]] = []
        if self.points.size and self.classes:
            first = self.classes[0]
            if self.points[0] > 0.0:
                self._gaps.append((0.0, first.lo, 0.0, float(self.points[0]), True))
            for j in range(1, len(self.classes)):
                self._gaps.append(
                    (
                        self.classes[j - 1].hi,
                        self.classes[j].lo,
                        float(self.points[j - 1]),
                        float(self.points[j]),
                        False,
                    )
                )
        self._maximal: dict[tuple[int, int], bool] = {}
        self._products: np.ndarray | None = None

    def _scalar_base(self, x: float, y: float) -> float:
        return float(self._base(np.array([x]), np.array([y]))[0])

    def to_base(self, x: np.ndarray) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        out = np.full(values.shape, np.nan)
        for x0, x1, p0, p1, closed in self._gaps:
            lower = values >= x0 if closed else values > x0
            mask = lower & (values < x1)
            mapped = p0 + (values[mask] - x0) * (p1 - p0) / (x1 - x0)
            # gap members stay strictly between the base points around them
            low = p0 if closed else np.nextafter(p0, p1)
            out[mask] = np.clip(mapped, low, np.nextafter(p1, p0))
        for j, shape in enumerate(self.classes):
            out[shape.contains(values)] = self.points[j]
        return out

    def locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        index, local = locate_many(self.partition, x)
        base = self.to_base(x)
        return index, local, base

    def base_product(self, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
        return np.asarray(self._base(pa, pb), dtype=float)

    def class_of_base(self, ps: np.ndarray, tol: float = 0.0) -> np.ndarray:
        out = np.full(np.shape(ps), -1, dtype=int)
        for j, point in enumerate(self.points):
            out[np.abs(ps - point) <= tol] = j
        return out

    def class_of_product(self, c_r: np.ndarray, c_t: np.ndarray, ps: np.ndarray) -> np.ndarray:
        """Exact match on the base points, except that two expanded points use the product table."""
        if self._products is None:
            n = len(self.classes)
            self._products = np.array([[self.product_class(i, j) for j in range(n)] for i in range(n)], dtype=int)
        out = self.class_of_base(ps)
        both = (c_r >= 0) & (c_t >= 0)
        out[both] = self._products[c_r[both], c_t[both]]
        return out

    def embed_base(self, ps: np.ndarray) -> np.ndarray:
        values = np.asarray(ps, dtype=float)
        out = np.full(values.shape, np.nan)
        for x0, x1, p0, p1, closed in self._gaps:
            lower = values >= p0 if closed else values > p0
            mask = lower & (values < p1)
            mapped = x0 + (values[mask] - p0) * (x1 - x0) / (p1 - p0)
            low = x0 if closed else np.nextafter(x0, x1)
            out[mask] = np.clip(mapped, low, np.nextafter(x1, x0))
        return out

    def product_class(self, i: int, j: int) -> int:
        s = self._scalar_base(self.points[i], self.points[j])
        return int(self.class_of_base(np.array([s]), BASE_POINT_TOL)[0])

    def residuum(self, x: float, s: float) -> float:
        """max{c : x * c <= s} in the base, by bisection; left-continuity makes it attained."""
        if self._scalar_base(x, 1.0) <= s + BASE_POINT_TOL:
            return 1.0
        lo, hi = 0.0, 1.0
        for _ in range(RESIDUUM_STEPS):
            mid = 0.5 * (lo + hi)
            if self._scalar_base(x, mid) <= s + BASE_POINT_TOL:
                lo = mid
            else:
                hi = mid
        return lo

    def is_maximal(self, i: int, j: int) -> bool:
        if (i, j) not in self._maximal:
            p_r, p_t = float(self.points[i]), float(self.points[j])
            s = self._scalar_base(p_r, p_t)
            self._maximal[(i, j)] = (
                abs(self.residuum(p_t, s) - p_r) <= 1e-9 and abs(self.residuum(p_r, s) - p_t) <= 1e-9
            )
        return self._maximal[(i, j)]


def validate_expansion(partition: IntervalPartition, expansion: BaseExpansion) -> ValidationReport:
    violations: list[Violation] = []
    points = expansion.points
    shapes = partition.classes
    if len(points) != len(shapes):
        violations.append(
            Violation("expansion", f"{len(points)} expanded points but {len(shapes)} classes")
        )
        return ValidationReport(tuple(violations))
    if not shapes:
        violations.append(Violation("expansion", "no point is expanded"))
        return ValidationReport(tuple(violations))
    for p in points:
        if not 0.0 <= p <= 1.0:
            violations.append(Violation("expansion", f"base point {p:g} outside [0, 1]"))
    if any(b <= a for a, b in zip(points, points[1:])):
        violations.append(Violation("expansion", "expanded points must be strictly increasing"))
    if points[-1] != 1.0:
        violations.append(Violation("expansion", "the identity 1 must be expanded into the filter class"))
    last = shapes[-1]
    if last.hi != 1.0 or not last.right_closed:
        violations.append(Violation("cover", "last class must contain 1", "1"))
    first = shapes[0]
    if points[0] == 0.0 and (first.lo != 0.0 or not first.left_closed):
        violations.append(Violation("cover", "the class of 0 must start at 0 and be closed there", "0"))
    if points[0] > 0.0 and first.lo == 0.0:
        violations.append(Violation("gap", "no room for the singleton classes below the first expanded point", "0"))
    if points[0] > 0.0 and not first.left_closed:
        violations.append(Violation("adjacency", "expanded class must be closed towards singleton classes", first.describe()))
    for index, (prev, nxt) in enumerate(zip(shapes, shapes[1:])):
        where = f"classes {index},{index + 1}"
        if nxt.lo <= prev.hi:
            violations.append(Violation("gap", "expanded classes need singleton classes between them", where))
            continue
        if not prev.right_closed or not nxt.left_closed:
            violations.append(
                Violation("adjacency", "expanded class must be closed towards singleton classes", where)
            )
    return ValidationReport(tuple(violations))


def boundary_points(structure: QuotientStructure) -> list[float]:
    points = {shape.lo for shape in structure.classes} | {shape.hi for shape in structure.classes}
    return sorted(point for point in points if 0.0 < point < 1.0)
