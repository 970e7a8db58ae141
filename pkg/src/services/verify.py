from __future__ import annotations

from typing import Any, Callable, Iterable, Sequence

import numpy as np

from src.models.coextension import CoextensionSpec
from src.models.partition import IntervalPartition
from src.models.report import GridReport
from src.models.tomonoid import FiniteTomonoid
from src.services.coextension_engine import evaluator_for, sample_points, structure_for
from src.services.errors import AxiomViolationError, NotACongruenceError
from src.services.finite_tomonoid import check_axioms
from src.services.interval_partition import locate_many
from src.services.quotient_structure import ExpandedQuotient, TnormFn
from src.utils.logger import get_app_logger

BORDER_OFFSET = 2.0**-30
TIE_ULPS = 16
LIMIT_STEP = 40
CHUNK_ELEMENTS = 4_000_000


def _above(values: np.ndarray, border: float) -> np.ndarray:
    return np.maximum(values, np.nextafter(border, 1.0))


def _odot1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a > 1.0 - b, a, 0.0)


def _odot2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    upper = b >= 0.8
    middle = (b > 0.6) & (b < 0.8)
    conditions = [
        a >= 0.8,
        upper & (((a > 0.2) & (a < 0.4)) | ((a > 0.6) & (a < 0.8))),
        upper & (a >= 0.4) & (a <= 0.6),
        upper & (a <= 0.2),
        a > 0.6,
        middle & (a >= 0.4) & (a <= 0.6),
        middle & (a > 0.2) & (a < 0.4),
        a >= 0.4,
    ]
    choices = [
        np.maximum(a + (b - 1.0), 0.8),
        a,
        np.maximum(a + 3.0 * (b - 1.0), 0.4),
        np.maximum(a + 2.0 * (b - 1.0), 0.0),
        a,
        np.full_like(a, 0.4),
        np.where(a > 1.0 - b, a, 0.0),
        np.maximum(2.0 / 3.0 * (a + b - 1.0), 0.0),
    ]
    return np.select(conditions, choices, 0.0)


def _odot3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    upper = b > 0.75
    conditions = [
        a > 0.75,
        upper & (a > 0.5),
        upper & (a > 0.25),
        upper,
        a > 0.5,
        (b > 0.5) & (a > 0.25),
    ]
    f = 4 * b - 3
    lower = np.maximum((a + (b - 1)) / f, 0.0)
    # products inside an open class never round onto its border
    choices = [
        _above(((4 * a - 3) * f + 3) / 4, 0.75),
        _above((4 * a - 2) * f / 4 + 0.5, 0.5),
        _above((4 * a - 1) * f / 4 + 0.25, 0.25),
        np.where(a < 0.25, np.minimum(lower, np.nextafter(0.25, 0.0)), 0.25),
        _above(2.0 / 3.0 * (2 * a * b - a - b + 0.875), 0.25),
        np.maximum(0.25 * (1 - 1 / (4 * (4 * a - 1) * (2 * b - 1))), 0.0),
    ]
    return np.select(conditions, choices, 0.0)


def _odot4(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    upper = b > 0.75
    conditions = [
        a > 0.75,
        upper & (a > 0.5),
        upper & (a > 0.25),
        upper,
        a > 0.5,
        (b > 0.625) & (a > 0.375) & (a <= 0.5),
    ]
    choices = [
        a,
        np.minimum(a, b - 0.25),
        np.minimum(a, b - 0.5),
        np.where(a > 1.0 - b, a, 0.0),
        np.minimum(np.minimum(a - 0.25, b - 0.25), 0.4375),
        np.full_like(a, 0.125),
    ]
    return np.select(conditions, choices, 0.0)


ORACLES: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "odot1": _odot1,
    "odot2": _odot2,
    "odot3": _odot3,
    "odot4": _odot4,
}
ORACLE_BOUNDARIES: dict[str, tuple[float, ...]] = {
    "odot1": (0.5,),
    "odot2": (0.2, 0.4, 0.6, 0.8),
    "odot3": (0.25, 0.5, 0.75),
    "odot4": (0.25, 0.375, 0.5, 0.625, 0.75),
}


def oracle(name: str, a: Any, b: Any) -> Any:
    """Closed forms of the four example t-norms; conditions are read on (min, max) of the arguments."""
    if name not in ORACLES:
        raise ValueError(f"unknown oracle {name!r}, expected one of {', '.join(sorted(ORACLES))}")
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    lo, hi = np.minimum(a_arr, b_arr), np.maximum(a_arr, b_arr)
    with np.errstate(all="ignore"):
        values = ORACLES[name](lo, hi)
    values = np.where(hi == 1.0, lo, values)
    values = np.where(lo == 0.0, 0.0, values)
    return float(values) if np.ndim(values) == 0 else values


def oracle_fn(name: str) -> TnormFn:
    if name not in ORACLES:
        raise ValueError(f"unknown oracle {name!r}, expected one of {', '.join(sorted(ORACLES))}")
    return lambda a, b: np.asarray(oracle(name, a, b), dtype=float)


def grid_points(n: int, extra_points: Iterable[float] = ()) -> np.ndarray:
    """k/(n-1) plus the given border points and points 2^-30 to either side of them."""
    if n < 2:
        raise ValueError("grid resolution must be >= 2")
    extra = np.asarray(list(extra_points), dtype=float)
    offsets = np.concatenate([extra, extra - BORDER_OFFSET, extra + BORDER_OFFSET])
    points = np.concatenate([np.linspace(0.0, 1.0, n), offsets])
    return np.unique(points[(points >= 0.0) & (points <= 1.0)])


def _worst(deviation: np.ndarray, axes: Sequence[np.ndarray]) -> tuple[float, tuple[float, ...]]:
    if deviation.size == 0:
        return 0.0, ()
    index = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
    return float(deviation[index]), tuple(float(axis[i]) for axis, i in zip(axes, index))


def check_axioms_grid(f: TnormFn, n: int, tol: float, extra_points: Iterable[float] = ()) -> list[GridReport]:
    xs = grid_points(n, extra_points)
    m = xs.size
    table = np.asarray(f(xs[:, None], xs[None, :]), dtype=float)

    chunk = max(1, CHUNK_ELEMENTS // (m * m))
    assoc_dev, assoc_witness = 0.0, (float(xs[0]),) * 3
    for start in range(0, m, chunk):
        a = xs[start : start + chunk]
        left = f(table[start : start + chunk, :, None], xs[None, None, :])
        right = f(a[:, None, None], table[None, :, :])
        deviation, witness = _worst(np.abs(left - right), (a, xs, xs))
        if deviation > assoc_dev:
            assoc_dev, assoc_witness = deviation, witness

    comm_dev, comm_witness = _worst(np.abs(table - table.T), (xs, xs))
    ident = np.abs(np.asarray(f(xs, np.ones_like(xs)), dtype=float) - xs)
    ident_dev, ident_witness = _worst(ident, (xs,))

    drop_a = np.maximum(table[:-1, :] - table[1:, :], 0.0)
    drop_b = np.maximum(table[:, :-1] - table[:, 1:], 0.0)
    mono_a, wit_a = _worst(drop_a, (xs[:-1], xs))
    mono_b, wit_b = _worst(drop_b, (xs, xs[:-1]))
    mono_dev, mono_witness = (mono_a, wit_a) if mono_a >= mono_b else (mono_b, wit_b)

    get_app_logger().info("GRID n=%d points=%d triples=%d", n, m, m**3)
    return [
        GridReport("associativity", assoc_dev, assoc_witness, m**3, tol),
        GridReport("commutativity", comm_dev, comm_witness, m * m, tol),
        GridReport("identity", ident_dev, ident_witness, m, tol),
        GridReport("monotonicity", mono_dev, mono_witness, 2 * m * (m - 1), tol),
    ]


def check_left_continuity(
    f: TnormFn,
    boundaries: Iterable[float],
    tol: float,
    n: int = 101,
) -> GridReport:
    """f(a, b) against its left limit along a - 2^-k at every border a > 0 and sampled b."""
    points = np.asarray(sorted({float(value) for value in boundaries if 0.0 < float(value) <= 1.0}), dtype=float)
    bs = grid_points(n, points)
    if points.size == 0:
        return GridReport("left-continuity", 0.0, (), 0, tol)
    a, b = np.meshgrid(points, bs, indexing="ij")
    at = np.asarray(f(a, b), dtype=float)
    last = np.asarray(f(np.maximum(a - 2.0**-LIMIT_STEP, 0.0), b), dtype=float)
    before = np.asarray(f(np.maximum(a - 2.0 ** -(LIMIT_STEP - 1), 0.0), b), dtype=float)
    # linear extrapolation of the tail in 2^-k
    limit = 2.0 * last - before
    deviation = np.abs(at - limit)
    dev, witness = _worst(deviation, (points, bs))
    return GridReport("left-continuity", dev, witness, int(at.size), tol)


def recover_quotient(f: TnormFn, partition: IntervalPartition) -> FiniteTomonoid:
    classes = partition.classes
    n = len(classes)
    table = [[0] * n for _ in range(n)]
    for i in range(n):
        xs = sample_points(classes[i], 7)
        for j in range(i + 1):
            ys = sample_points(classes[j], 7)
            a, b = np.meshgrid(xs, ys, indexing="ij")
            values = np.asarray(f(a, b), dtype=float)
            owners, _ = locate_many(partition, values)
            found = np.unique(owners)
            if found.size != 1 or found[0] < 0:
                first = np.argwhere(owners == owners.flat[0])[0]
                other = np.argwhere(owners != owners.flat[0])
                second = other[0] if other.size else first
                witness = (
                    float(a[tuple(first)]),
                    float(b[tuple(first)]),
                    float(a[tuple(second)]),
                    float(b[tuple(second)]),
                )
                raise NotACongruenceError(
                    f"products of classes {i} and {j} fall into classes {found.tolist()}", witness
                )
            table[i][j] = table[j][i] = int(found[0])
    report = check_axioms(table)
    if not report.ok:
        raise AxiomViolationError(report)
    return FiniteTomonoid.from_rows(table)


def recover_base(f: TnormFn, spec: CoextensionSpec, sample_count: int = 4096, tol: float = 1e-9) -> GridReport:
    """Collapses an iterated construction onto its base t-norm and measures the disagreement."""
    if spec.expansion is None:
        raise ValueError("recover_base needs a spec built over a base t-norm")
    structure = structure_for(spec)
    if not isinstance(structure, ExpandedQuotient):
        raise ValueError("recover_base needs a spec built over a base t-norm")
    base = evaluator_for(spec.expansion.base)
    rng = np.random.default_rng(0)
    inside = np.concatenate([sample_points(shape, 5) for shape in structure.classes])
    xs = np.concatenate([rng.random(sample_count), inside])
    ys = np.concatenate([rng.random(sample_count), inside[::-1]])
    collapsed = structure.to_base(np.asarray(f(xs, ys), dtype=float))
    expected = np.asarray(base(structure.to_base(xs), structure.to_base(ys)), dtype=float)
    deviation = np.abs(collapsed - expected)
    index = int(np.argmax(deviation))
    return GridReport("base-recovery", float(deviation[index]), (float(xs[index]), float(ys[index])), xs.size, tol)


def compare(
    f: TnormFn,
    g: TnormFn,
    n: int,
    extra_points: Iterable[float] = (),
    tol: float = 1e-12,
) -> GridReport:
    """max |f - g| on the grid.

    Points on a declared border are compared strictly. Elsewhere, where g jumps within
    TIE_ULPS ulps of the point, f may match g at any of the ulp-shifted neighbours: a
    discontinuity line such as a + b = 1 crossing a gap is not representable exactly
    through the affine class maps.
    """
    borders = np.asarray(sorted(set(float(p) for p in extra_points)), dtype=float)
    xs = grid_points(n, borders)
    a, b = np.meshgrid(xs, xs, indexing="ij")
    fv = np.asarray(f(a, b), dtype=float)
    gv = np.asarray(g(a, b), dtype=float)
    deviation = np.abs(fv - gv)

    on_border = np.isin(a, borders) | np.isin(b, borders)
    shift_a = TIE_ULPS * np.spacing(a)
    shift_b = TIE_ULPS * np.spacing(b)
    g_low, g_high = gv.copy(), gv.copy()
    nearest = deviation.copy()
    for sa in (-1.0, 0.0, 1.0):
        for sb in (-1.0, 0.0, 1.0):
            if sa == 0.0 and sb == 0.0:
                continue
            shifted = np.asarray(
                g(np.clip(a + sa * shift_a, 0.0, 1.0), np.clip(b + sb * shift_b, 0.0, 1.0)),
                dtype=float,
            )
            g_low = np.minimum(g_low, shifted)
            g_high = np.maximum(g_high, shifted)
            nearest = np.minimum(nearest, np.abs(fv - shifted))
    ties = ~on_border & (g_high - g_low > tol)
    deviation = np.where(ties, nearest, deviation)
    if ties.any():
        get_app_logger().info("COMPARE n=%d tie points=%d", n, int(ties.sum()))

    dev, witness = _worst(deviation, (xs, xs))
    return GridReport("compare", dev, witness, int(deviation.size), tol)


def residuum_grid(f: TnormFn, a: Any, b: Any, steps: int = 60) -> np.ndarray:
    """max{c : f(a, c) <= b} by bisection; left-continuity makes the maximum attained."""
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    lo = np.zeros(a_arr.shape)
    hi = np.ones(a_arr.shape)
    done = np.asarray(f(a_arr, hi), dtype=float) <= b_arr
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = np.asarray(f(a_arr, mid), dtype=float) <= b_arr
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return np.where(done, 1.0, lo)


def boundaries_of(spec: CoextensionSpec) -> list[float]:
    """Class borders of a construction, including the borders of its base carried into the gaps."""
    points = set(spec.partition.boundaries())
    if spec.expansion is not None:
        structure = structure_for(spec)
        embedded = structure.embed_base(np.asarray(boundaries_of(spec.expansion.base), dtype=float))
        points.update(float(value) for value in embedded if np.isfinite(value))
    return sorted(points)
