from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

import numpy as np

from src.models.partition import ClassShape, IntervalPartition, Orientation
from src.models.tomonoid import FiniteTomonoid


class FilterKind(str, Enum):
    LUKASIEWICZ = "lukasiewicz"
    PRODUCT = "product"


class PairContext(str, Enum):
    MAXIMAL = "maximal"
    NON_MAXIMAL = "non_maximal"
    SINGLETON_R = "singleton_r"
    SINGLETON_S = "singleton_s"
    SINGLETON_T = "singleton_t"


class PairCase(str, Enum):
    IMPOSSIBLE = "impossible"
    TRIVIAL = "trivial"
    LUK_LUK = "luk-luk"
    LUK_RPROD = "luk-rprod"
    PROD_LUK = "prod-luk"
    PROD_PROD = "prod-prod"
    PROD_RPROD = "prod-rprod"
    PROD_POWER = "prod-power"
    RPROD_RPROD = "rprod-rprod"
    POWER_RPROD = "power-rprod"
    POWER_POWER = "power-power"
    GOEDEL_GOEDEL = "goedel-goedel"
    GOEDEL_RGOEDEL = "goedel-rgoedel"
    RGOEDEL_RGOEDEL = "rgoedel-rgoedel"

    @property
    def is_family(self) -> bool:
        return self not in (PairCase.IMPOSSIBLE, PairCase.TRIVIAL)


ARCHIMEDEAN_FAMILIES = (
    PairCase.LUK_LUK,
    PairCase.LUK_RPROD,
    PairCase.PROD_LUK,
    PairCase.PROD_PROD,
    PairCase.PROD_RPROD,
    PairCase.PROD_POWER,
    PairCase.RPROD_RPROD,
    PairCase.POWER_RPROD,
    PairCase.POWER_POWER,
)
SEMILATTICE_FAMILIES = (
    PairCase.GOEDEL_GOEDEL,
    PairCase.GOEDEL_RGOEDEL,
    PairCase.RGOEDEL_RGOEDEL,
)


@dataclass(frozen=True)
class RhoAssignment:
    class_index: int
    alpha: float

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 0:
            raise ValueError("alpha must be a positive real")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class AffineZMap:
    """t -> c0 + c1 * t on the local coordinate of the second factor."""

    c0: float = 0.0
    c1: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c1", float(self.c1))

    def __call__(self, t: Any) -> np.ndarray:
        return self.c0 + self.c1 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class ParameterRange:
    low: float
    low_closed: bool
    high: float
    high_closed: bool

    def contains(self, z: Any) -> np.ndarray:
        values = np.asarray(z, dtype=float)
        above = values >= self.low if self.low_closed else values > self.low
        below = values <= self.high if self.high_closed else values < self.high
        return above & below

    def clamp(self, z: Any) -> np.ndarray:
        # only attained bounds can absorb an excursion of the zmap
        values = np.asarray(z, dtype=float)
        low = self.low if self.low_closed else -np.inf
        high = self.high if self.high_closed else np.inf
        return np.clip(values, low, high)

    def describe(self) -> str:
        left = "[" if self.low_closed else "("
        right = "]" if self.high_closed else ")"
        return f"{left}{self.low:g}, {self.high:g}{right}"


@dataclass(frozen=True)
class FixpointSet:
    """Finite union of intervals and isolated points inside a host chain."""

    components: tuple[ClassShape, ...]
    host: ClassShape = field(default_factory=lambda: ClassShape(0.0, 1.0))

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.components, key=lambda shape: (shape.lo, shape.hi)))
        for prev, nxt in zip(ordered, ordered[1:]):
            touching = prev.hi == nxt.lo and not (prev.right_closed and nxt.left_closed)
            if prev.hi > nxt.lo or (prev.hi == nxt.lo and not touching):
                raise ValueError(f"components overlap at {nxt.lo}")
        for shape in ordered:
            if shape.lo < self.host.lo or shape.hi > self.host.hi:
                raise ValueError(f"component {shape.describe()} leaves the host chain")
        object.__setattr__(self, "components", ordered)

    def contains(self, x: Any) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        mask = np.zeros(values.shape, dtype=bool)
        for shape in self.components:
            mask |= shape.contains(values)
        return mask

    def max_at_most(self, a: Any) -> np.ndarray:
        """Largest member not above a; -inf where there is none."""
        values = np.asarray(a, dtype=float)
        best = np.full(values.shape, -np.inf)
        for shape in self.components:
            inside = shape.contains(values)
            below = values >= shape.hi
            candidate = np.where(inside, values, np.where(below, shape.hi, -np.inf))
            best = np.maximum(best, candidate)
        return best

    def sup_below(self, v: Any) -> np.ndarray:
        """sup of the members strictly below v; 0 where there is none."""
        values = np.asarray(v, dtype=float)
        best = np.full(values.shape, -np.inf)
        for shape in self.components:
            candidate = np.where(shape.lo < values, np.minimum(shape.hi, values), -np.inf)
            best = np.maximum(best, candidate)
        return np.where(np.isfinite(best), best, 0.0)


@dataclass(frozen=True)
class PairFamily:
    r_index: int
    t_index: int
    case: PairCase
    m: float | None = None
    zmap: AffineZMap = field(default_factory=AffineZMap)
    sprime: FixpointSet | None = None

    def __post_init__(self) -> None:
        if self.t_index < 0 or self.r_index < self.t_index:
            raise ValueError("pair indices must satisfy r_index >= t_index >= 0")
        object.__setattr__(self, "case", PairCase(self.case))
        if self.case is PairCase.IMPOSSIBLE:
            raise ValueError("a pair cannot be assigned the impossible case")
        if self.m is not None:
            m = float(self.m)
            if np.isnan(m):
                raise ValueError("m must be a real number")
            object.__setattr__(self, "m", None if np.isinf(m) else m)

    @property
    def key(self) -> tuple[int, int]:
        return (self.r_index, self.t_index)


@dataclass(frozen=True)
class NuAssignment:
    class_index: int
    orientation: Orientation

    def __post_init__(self) -> None:
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    def nu(self, f: Any) -> np.ndarray:
        values = np.asarray(f, dtype=float)
        if self.orientation is Orientation.PRESERVING:
            return values
        return 1.0 - values


CoextensionSpec = Union["ArchCoextensionSpec", "SemiCoextensionSpec"]


@dataclass(frozen=True)
class BaseExpansion:
    """Expands finitely many points of an already built t-norm into intervals."""

    base_path: str
    base: CoextensionSpec
    points: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(float(point) for point in self.points))


def _check_source(quotient: FiniteTomonoid | None, expansion: BaseExpansion | None) -> None:
    if (quotient is None) == (expansion is None):
        raise ValueError("exactly one of quotient or expansion is required")


@dataclass(frozen=True)
class ArchCoextensionSpec:
    quotient: FiniteTomonoid | None
    partition: IntervalPartition
    filter_kind: FilterKind
    rho: tuple[RhoAssignment, ...] = ()
    pairs: tuple[PairFamily, ...] = ()
    expansion: BaseExpansion | None = None

    def __post_init__(self) -> None:
        _check_source(self.quotient, self.expansion)
        object.__setattr__(self, "filter_kind", FilterKind(self.filter_kind))
        object.__setattr__(self, "rho", tuple(self.rho))
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def alpha_for(self, class_index: int) -> float | None:
        for item in self.rho:
            if item.class_index == class_index:
                return item.alpha
        return None

    def pair_for(self, r_index: int, t_index: int) -> PairFamily | None:
        for item in self.pairs:
            if item.key == (r_index, t_index):
                return item
        return None


@dataclass(frozen=True)
class SemiCoextensionSpec:
    quotient: FiniteTomonoid | None
    partition: IntervalPartition
    nu: tuple[NuAssignment, ...] = ()
    pairs: tuple[PairFamily, ...] = ()
    expansion: BaseExpansion | None = None

    def __post_init__(self) -> None:
        _check_source(self.quotient, self.expansion)
        object.__setattr__(self, "nu", tuple(self.nu))
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def orientation_for(self, class_index: int) -> Orientation | None:
        for item in self.nu:
            if item.class_index == class_index:
                return item.orientation
        return None

    def pair_for(self, r_index: int, t_index: int) -> PairFamily | None:
        for item in self.pairs:
            if item.key == (r_index, t_index):
                return item
        return None
