"""
Command-line front end.

Usage:
    python -m src.cli check specs/table.spec
    python -m src.cli build specs/odot3.spec
    python -m src.cli eval specs/odot3.spec 0.2 0.9
    python -m src.cli verify specs/odot1.spec --n 201 --tol 1e-9
    python -m src.cli oracle-compare specs/odot2.spec --oracle odot2 --n 1001

Exit status: 0 success, 1 verification failure, 2 usage, parse or spec error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from src.models.coextension import ArchCoextensionSpec, CoextensionSpec
from src.models.document import DocumentKind, SpecDocument
from src.models.report import GridReport
from src.services import arch_coextension, semilattice_coextension
from src.services.coextension_engine import evaluator_for, validate_any
from src.services.errors import (
    AxiomViolationError,
    EnumerationLimitError,
    InvalidSpecError,
    MalformedTableError,
    NotACongruenceError,
    ParameterRangeError,
    SpecParseError,
)
from src.services.finite_tomonoid import (
    build_tomonoid,
    check_axioms,
    congruence_by_filter,
    enumerate_tomonoids,
    filters,
    quotient,
)
from src.services.report_export import (
    case_frame,
    findings_frame,
    grid_reports_frame,
    to_csv_text,
    validation_frame,
    values_frame,
    write_csv,
)
from src.services.spec_parser import format_spec, load_spec
from src.services.verify import (
    ORACLE_BOUNDARIES,
    ORACLES,
    boundaries_of,
    check_axioms_grid,
    check_left_continuity,
    compare,
    oracle_fn,
    recover_base,
    recover_quotient,
)
from src.utils.logger import get_app_logger, get_audit_logger, get_error_logger, timed
from src.utils.settings import load_settings

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _fail(message: str, code: int = EXIT_USAGE) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> SpecDocument:
    try:
        doc = load_spec(path)
    except SpecParseError as exc:
        get_error_logger().error("PARSE failed spec=%s: %s", path, exc)
        _fail(f"{path}: {exc}")
    get_app_logger().info("Spec loaded path=%s kind=%s", path, doc.kind.value)
    return doc


def _coextension(path: str) -> CoextensionSpec:
    doc = _load(path)
    if doc.coextension is None:
        _fail(f"{path} holds a tomonoid table, not a coextension spec")
    return doc.coextension


def _require_valid(path: str, spec: CoextensionSpec) -> None:
    report = validate_any(spec)
    if report.ok:
        return
    for line in report.messages():
        click.echo(line, err=True)
    get_error_logger().error("VALIDATE failed spec=%s: %s", path, "; ".join(report.messages()))
    sys.exit(EXIT_USAGE)


def _echo_reports(reports: list[GridReport]) -> None:
    for report in reports:
        status = "pass" if report.passed else "FAIL"
        witness = ", ".join(f"{value:.17g}" for value in report.witness)
        click.echo(
            f"{report.axiom:<18} {status}  max_deviation={report.max_deviation:.3g}"
            f"  tol={report.tolerance:g}  samples={report.samples}  witness=({witness})"
        )


@click.group()
def main() -> None:
    """Build left-continuous t-norms as coextensions of finite tomonoids and verify them."""


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="CSV file for the violations; no CSV is written without it.")
def check(spec_path: str, report_path: str | None) -> None:
    """Check the tomonoid axioms of a table."""
    doc = _load(spec_path)
    table = doc.quotient_table
    if table is None:
        _fail(f"{spec_path} has no tomonoid table")
    report = check_axioms(table)
    lines = report.lines()
    for line in lines:
        click.echo(line)
    if report_path:
        write_csv(findings_frame(lines), report_path)
    status = "pass" if report.ok else "fail"
    get_audit_logger().info("CHECK %s spec=%s", status, spec_path)
    if report.ok:
        click.echo("ok: associative, commutative, identity at the top, negative, monotone")
        return
    sys.exit(EXIT_FAILED)


@main.command(name="filters")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
def list_filters(spec_path: str) -> None:
    """List the filters of a tomonoid and the quotient by each."""
    doc = _load(spec_path)
    table = doc.quotient_table
    if table is None:
        _fail(f"{spec_path} has no tomonoid table")
    try:
        tomonoid = build_tomonoid(table)
    except (MalformedTableError, AxiomViolationError) as exc:
        _fail(str(exc), EXIT_FAILED)
    for filt in filters(tomonoid):
        congruence = congruence_by_filter(tomonoid, filt)
        classes = " ".join(f"{{{lo}..{hi}}}" if lo != hi else f"{{{lo}}}" for lo, hi in congruence.classes)
        click.echo(f"filter [{filt.low}, {tomonoid.top}]  classes {classes}")
        try:
            induced = quotient(tomonoid, filt)
        except NotACongruenceError as exc:
            click.echo(f"  {exc}")
            continue
        for row in induced.table:
            click.echo("  " + " ".join(str(entry) for entry in row))
    get_audit_logger().info("FILTERS spec=%s", spec_path)


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="CSV file for the case table; no CSV is written without it.")
def build(spec_path: str, report_path: str | None) -> None:
    """Validate a coextension spec and show the case of every class pair."""
    spec = _coextension(spec_path)
    report = validate_any(spec)
    try:
        if isinstance(spec, ArchCoextensionSpec):
            rows = arch_coextension.case_table(spec)
        else:
            rows = semilattice_coextension.case_table(spec)
    except InvalidSpecError:
        rows = []
    for row in rows:
        given = f" (given {row['given']})" if row["given"] and row["given"] != row["case"] else ""
        click.echo(
            f"R={row['r']} T={row['t']} -> S={row['s']}  {row['r_kind']}->{row['s_kind']}"
            f"  {row['context']:<11} {row['case']}{given}"
        )
    if report_path:
        frame = case_frame(rows) if report.ok else validation_frame(report)
        write_csv(frame, report_path)
    if not report.ok:
        for line in report.messages():
            click.echo(line, err=True)
        get_error_logger().error("BUILD invalid spec=%s: %s", spec_path, "; ".join(report.messages()))
        get_audit_logger().info("BUILD fail spec=%s", spec_path)
        sys.exit(EXIT_USAGE)
    get_audit_logger().info("BUILD pass spec=%s pairs=%d", spec_path, len(rows))
    click.echo("valid")


@main.command(name="eval")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("a", type=click.FloatRange(0.0, 1.0))
@click.argument("b", type=click.FloatRange(0.0, 1.0))
def evaluate_point(spec_path: str, a: float, b: float) -> None:
    """Evaluate the constructed t-norm at (a, b)."""
    spec = _coextension(spec_path)
    _require_valid(spec_path, spec)
    try:
        value = float(evaluator_for(spec)(np.array([a]), np.array([b]))[0])
    except ParameterRangeError as exc:
        get_error_logger().exception("EVAL failed spec=%s a=%r b=%r", spec_path, a, b)
        _fail(str(exc))
    click.echo(f"{value:.15g}")


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Points per axis.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV target (stdout if omitted).")
def grid(spec_path: str, n: int | None, out_path: str | None) -> None:
    """Tabulate the constructed t-norm on an n x n grid as CSV a,b,value."""
    n = n or load_settings().grid_n
    spec = _coextension(spec_path)
    _require_valid(spec_path, spec)
    xs = np.linspace(0.0, 1.0, n)
    a, b = np.meshgrid(xs, xs, indexing="ij")
    frame = values_frame(a, b, evaluator_for(spec)(a, b))
    if out_path:
        write_csv(frame, out_path)
        click.echo(f"wrote {len(frame)} rows to {out_path}")
    else:
        click.echo(to_csv_text(frame), nl=False)
    get_audit_logger().info("GRID spec=%s n=%d", spec_path, n)


def _structure_reports(spec: CoextensionSpec, fn, tol: float) -> list[GridReport]:
    reports: list[GridReport] = []
    if isinstance(spec, ArchCoextensionSpec):
        reports.append(arch_coextension.verify_commuting(spec, tol=tol))
    else:
        reports.append(semilattice_coextension.verify_idempotency(spec, tol=max(tol, 1e-12)))
    if spec.expansion is not None:
        reports.append(recover_base(fn, spec, tol=tol))
        return reports
    try:
        recovered = recover_quotient(fn, spec.partition)
    except (NotACongruenceError, AxiomViolationError) as exc:
        get_error_logger().error("VERIFY quotient recovery failed: %s", exc)
        return reports + [GridReport("quotient", 1.0, getattr(exc, "witness", ()), 0, 0.0)]
    mismatches = sum(
        int(x != y) for row_a, row_b in zip(recovered.table, spec.quotient.table) for x, y in zip(row_a, row_b)
    )
    reports.append(GridReport("quotient", float(mismatches), (), spec.quotient.n**2, 0.0))
    return reports


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Grid resolution (default TNORM_GRID_N).")
@click.option("--tol", "tol", type=float, default=None, help="Axiom tolerance (default TNORM_TOL).")
@click.option("--lc-tol", "lc_tol", type=float, default=None, help="Left-continuity tolerance (default TNORM_LC_TOL).")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="CSV file for the grid reports; no CSV is written without it.")
def verify(spec_path: str, n: int | None, tol: float | None, lc_tol: float | None, report_path: str | None) -> None:
    """Run the axiom grids, left-continuity checks and structure checks."""
    settings = load_settings()
    n = n or settings.grid_n
    tol = settings.tol if tol is None else tol
    lc_tol = settings.lc_tol if lc_tol is None else lc_tol
    spec = _coextension(spec_path)
    _require_valid(spec_path, spec)
    fn = evaluator_for(spec)
    borders = boundaries_of(spec)
    with timed(f"verify {Path(spec_path).name} n={n}"):
        reports = check_axioms_grid(fn, n, tol, borders)
        reports.append(check_left_continuity(fn, borders, lc_tol))
        reports.extend(_structure_reports(spec, fn, tol))
    _echo_reports(reports)
    if report_path:
        write_csv(grid_reports_frame(reports), report_path)
    passed = all(report.passed for report in reports)
    get_audit_logger().info("VERIFY %s spec=%s n=%d", "pass" if passed else "fail", Path(spec_path).name, n)
    if not passed:
        failed = [report.axiom for report in reports if not report.passed]
        get_error_logger().error("VERIFY failed spec=%s axioms=%s", spec_path, ",".join(failed))
        sys.exit(EXIT_FAILED)


@main.command(name="oracle-compare")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--oracle", "oracle_name", type=click.Choice(sorted(ORACLES)), required=True)
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Grid resolution (default TNORM_COMPARE_N).")
@click.option("--tol", "tol", type=float, default=1e-12, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="CSV file for the comparison; no CSV is written without it.")
def oracle_compare(spec_path: str, oracle_name: str, n: int | None, tol: float, report_path: str | None) -> None:
    """Compare the constructed t-norm with a closed form on a grid through all borders."""
    n = n or load_settings().compare_n
    spec = _coextension(spec_path)
    _require_valid(spec_path, spec)
    borders = sorted(set(boundaries_of(spec)) | set(ORACLE_BOUNDARIES[oracle_name]))
    with timed(f"oracle-compare {Path(spec_path).name} n={n}"):
        report = compare(evaluator_for(spec), oracle_fn(oracle_name), n, borders, tol=tol)
    _echo_reports([report])
    click.echo(f"max deviation {report.max_deviation:.3g}")
    if report_path:
        write_csv(grid_reports_frame([report]), report_path)
    get_audit_logger().info(
        "ORACLE %s spec=%s oracle=%s n=%d", "pass" if report.passed else "fail", Path(spec_path).name, oracle_name, n
    )
    if not report.passed:
        sys.exit(EXIT_FAILED)


@main.command(name="enumerate")
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Chain length.")
def enumerate_command(n: int) -> None:
    """Print every tomonoid table on the n-element chain."""
    try:
        found = enumerate_tomonoids(n)
    except EnumerationLimitError as exc:
        _fail(str(exc))
    for index, tomonoid in enumerate(found):
        if index:
            click.echo("")
        click.echo(format_spec(SpecDocument(DocumentKind.TOMONOID, table=tomonoid.table)), nl=False)
    click.echo(f"# {len(found)} tables", err=True)
    get_audit_logger().info("ENUMERATE n=%d count=%d", n, len(found))


if __name__ == "__main__":
    main()
