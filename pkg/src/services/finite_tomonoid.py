from __future__ import annotations

from typing import Any

import numpy as np

from src.models.tomonoid import AxiomReport, AxiomViolation, Congruence, Filter, FiniteTomonoid
from src.services.errors import (
    AxiomViolationError,
    EnumerationLimitError,
    MalformedTableError,
    NotACongruenceError,
)
from src.utils.logger import get_app_logger
from src.utils.settings import load_settings


def _structural_errors(table: Any) -> tuple[np.ndarray | None, list[str]]:
    try:
        rows = [list(row) for row in table]
    except TypeError:
        return None, ["table must be a sequence of rows"]
    n = len(rows)
    if n == 0:
        return None, ["table is empty"]
    errors: list[str] = []
    for i, row in enumerate(rows):
        if len(row) != n:
            errors.append(f"row {i} has {len(row)} entries, expected {n}")
            continue
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, np.integer)):
                errors.append(f"entry ({i},{j}) is not an integer: {entry!r}")
            elif not 0 <= entry < n:
                errors.append(f"entry ({i},{j})={entry} outside 0..{n - 1}")
    if errors:
        return None, errors
    return np.array(rows, dtype=int), []


def _associativity_witness(arr: np.ndarray) -> tuple[int, int, int] | None:
    idx = np.arange(arr.shape[0])
    left = arr[arr[:, :, None], idx[None, None, :]]
    right = arr[idx[:, None, None], arr[None, :, :]]
    bad = np.argwhere(left != right)
    if bad.size == 0:
        return None
    a, b, c = (int(value) for value in bad[0])
    return a, b, c


def check_axioms(table: Any) -> AxiomReport:
    """Structural errors first; axiom violations are only looked for on well-formed tables."""
    arr, structural = _structural_errors(table)
    if arr is None:
        return AxiomReport(structural=tuple(structural))

    n = arr.shape[0]
    idx = np.arange(n)
    violations: list[AxiomViolation] = []

    witness = _associativity_witness(arr)
    if witness is not None:
        a, b, c = witness
        violations.append(
            AxiomViolation(
                "associativity",
                witness,
                f"({a}*{b})*{c}={arr[arr[a, b], c]} but {a}*({b}*{c})={arr[a, arr[b, c]]}",
            )
        )

    bad = np.argwhere(arr != arr.T)
    if bad.size:
        a, b = (int(value) for value in bad[0])
        violations.append(AxiomViolation("commutativity", (a, b), f"{a}*{b}={arr[a, b]} but {b}*{a}={arr[b, a]}"))

    bad = np.nonzero((arr[:, n - 1] != idx) | (arr[n - 1, :] != idx))[0]
    if bad.size:
        a = int(bad[0])
        violations.append(AxiomViolation("identity", (a,), f"{a}*{n - 1}={arr[a, n - 1]}"))

    bad = np.argwhere(arr > np.minimum.outer(idx, idx))
    if bad.size:
        a, b = (int(value) for value in bad[0])
        violations.append(AxiomViolation("negativity", (a, b), f"{a}*{b}={arr[a, b]} exceeds min"))

    rows_down = np.argwhere(np.diff(arr, axis=0) < 0)
    cols_down = np.argwhere(np.diff(arr, axis=1) < 0)
    if rows_down.size:
        a, c = (int(value) for value in rows_down[0])
        violations.append(
            AxiomViolation("monotonicity", (a, a + 1, c), f"{a + 1}*{c}={arr[a + 1, c]} < {a}*{c}={arr[a, c]}")
        )
    elif cols_down.size:
        c, a = (int(value) for value in cols_down[0])
        violations.append(
            AxiomViolation("monotonicity", (a, a + 1, c), f"{c}*{a + 1}={arr[c, a + 1]} < {c}*{a}={arr[c, a]}")
        )

    return AxiomReport(violations=tuple(violations))


def build_tomonoid(table: Any) -> FiniteTomonoid:
    report = check_axioms(table)
    if report.structural:
        raise MalformedTableError("; ".join(report.structural))
    if report.violations:
        raise AxiomViolationError(report)
    return FiniteTomonoid.from_rows(table)


def idempotents(tomonoid: FiniteTomonoid) -> list[int]:
    return [a for a in range(tomonoid.n) if tomonoid.table[a][a] == a]


def filters(tomonoid: FiniteTomonoid) -> list[Filter]:
    # a finite chain has no filters of the form (d, 1]
    return [Filter(tomonoid, d) for d in idempotents(tomonoid)]


def congruence_by_filter(tomonoid: FiniteTomonoid, filt: Filter) -> Congruence:
    arr = tomonoid.array
    d = filt.low
    classes: list[tuple[int, int]] = []
    start = 0
    while start < tomonoid.n:
        end = start
        # b ~ start iff b * d <= start <= b
        while end + 1 < tomonoid.n and arr[end + 1, d] <= start:
            end += 1
        classes.append((start, end))
        start = end + 1
    return Congruence(tomonoid, tuple(classes))


def quotient(tomonoid: FiniteTomonoid, filt: Filter) -> FiniteTomonoid:
    congruence = congruence_by_filter(tomonoid, filt)
    arr = tomonoid.array
    class_of = np.empty(tomonoid.n, dtype=int)
    for index, (lo, hi) in enumerate(congruence.classes):
        class_of[lo : hi + 1] = index
    reps = np.array([lo for lo, _ in congruence.classes])
    induced = class_of[arr[np.ix_(reps, reps)]]
    lifted = induced[class_of[:, None], class_of[None, :]]
    if np.any(class_of[arr] != lifted):
        a, b = (int(value) for value in np.argwhere(class_of[arr] != lifted)[0])
        raise NotACongruenceError(f"induced operation is not well defined at ({a},{b})", (a, b))
    return FiniteTomonoid.from_rows(induced.tolist())


def residuum(tomonoid: FiniteTomonoid, a: int, b: int) -> int:
    row = tomonoid.table[a]
    return max(c for c in range(tomonoid.n) if row[c] <= b)


def maximal_pair(tomonoid: FiniteTomonoid, r: int, t: int) -> tuple[int, int]:
    s = tomonoid.table[r][t]
    r_bar = residuum(tomonoid, t, s)
    t_bar = residuum(tomonoid, r_bar, s)
    return r_bar, t_bar


def is_maximal_pair(tomonoid: FiniteTomonoid, r: int, t: int) -> bool:
    s = tomonoid.table[r][t]
    return residuum(tomonoid, t, s) == r and residuum(tomonoid, r, s) == t


def cayley(tomonoid: FiniteTomonoid) -> list[tuple[int, ...]]:
    return [tuple(row) for row in tomonoid.table]


def _power(tomonoid: FiniteTomonoid, b: int, k: int) -> int:
    value = b
    for _ in range(k - 1):
        value = tomonoid.table[value][b]
    return value


def is_archimedean(tomonoid: FiniteTomonoid) -> bool:
    # on an n-chain the powers of b are stable after n steps
    n = tomonoid.n
    for b in range(n - 1):
        power = _power(tomonoid, b, n)
        if any(power > a for a in range(b)):
            return False
    return True


def is_semilattice(tomonoid: FiniteTomonoid) -> bool:
    return all(
        tomonoid.table[a][b] == min(a, b) for a in range(tomonoid.n) for b in range(tomonoid.n)
    )


def enumerate_tomonoids(n: int, limit: int | None = None) -> list[FiniteTomonoid]:
    """All tomonoid tables on the n-chain in lexicographic row-major order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    limit = load_settings().enum_limit if limit is None else limit
    if n > limit:
        raise EnumerationLimitError(f"exhaustive enumeration is limited to n <= {limit}, got {n}")

    top = n - 1
    grid = [[0] * n for _ in range(n)]
    for a in range(n):
        grid[a][top] = a
        grid[top][a] = a
    cells = [(a, b) for a in range(top) for b in range(a, top)]
    found: list[FiniteTomonoid] = []

    def place(k: int) -> None:
        if k == len(cells):
            if _associativity_witness(np.array(grid, dtype=int)) is None:
                found.append(FiniteTomonoid.from_rows(grid))
            return
        a, b = cells[k]
        low = max(grid[a - 1][b] if a > 0 else 0, grid[a][b - 1] if b > 0 else 0)
        for value in range(low, a + 1):
            grid[a][b] = value
            grid[b][a] = value
            place(k + 1)

    place(0)
    get_app_logger().info("ENUMERATE n=%d count=%d", n, len(found))
    return found
