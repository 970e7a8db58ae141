from __future__ import annotations

from pathlib import Path

import numpy as np
import plotly.graph_objects as go
import streamlit as st

from src.models.coextension import ArchCoextensionSpec, CoextensionSpec
from src.models.document import SpecDocument
from src.services import arch_coextension, semilattice_coextension
from src.services.coextension_engine import evaluator_for, validate_any
from src.services.errors import ParameterRangeError, SpecParseError
from src.services.report_export import case_frame, grid_reports_frame, to_csv_text, validation_frame
from src.services.spec_parser import load_spec, parse_spec
from src.services.verify import boundaries_of, check_axioms_grid, check_left_continuity, recover_base
from src.utils.logger import get_app_logger, get_audit_logger, get_error_logger
from src.utils.settings import load_settings


APP_LOGGER = get_app_logger()
ERROR_LOGGER = get_error_logger()
AUDIT_LOGGER = get_audit_logger()
HEATMAP_N = 201


def _spec_files(spec_dir: Path) -> list[Path]:
    return sorted(spec_dir.glob("*.spec"))


def _load_uploaded(text: str, spec_dir: Path) -> SpecDocument:
    return parse_spec(text, resolver=lambda name: load_spec(spec_dir / name))


def _quotient_rows(spec: CoextensionSpec) -> list[dict[str, int]]:
    table = spec.quotient.table if spec.quotient is not None else ()
    return [{str(j): entry for j, entry in enumerate(row)} for row in table]


def _case_rows(spec: CoextensionSpec) -> list[dict]:
    if isinstance(spec, ArchCoextensionSpec):
        return arch_coextension.case_table(spec)
    return semilattice_coextension.case_table(spec)


def _heatmap(fn, n: int) -> go.Figure:
    xs = np.linspace(0.0, 1.0, n)
    a, b = np.meshgrid(xs, xs, indexing="ij")
    values = np.asarray(fn(a, b), dtype=float)
    figure = go.Figure(go.Heatmap(x=xs, y=xs, z=values.T, colorscale="Viridis", colorbar={"title": "a*b"}))
    figure.update_layout(xaxis_title="a", yaxis_title="b", height=520, margin={"l": 40, "r": 20, "t": 30, "b": 40})
    return figure


def _cut(fn, b: float, n: int) -> go.Figure:
    xs = np.linspace(0.0, 1.0, n)
    values = np.asarray(fn(xs, np.full_like(xs, b)), dtype=float)
    figure = go.Figure(go.Scatter(x=xs, y=values, mode="lines", name=f"b={b:g}"))
    figure.update_layout(xaxis_title="a", yaxis_title=f"a * {b:g}", height=360, margin={"l": 40, "r": 20, "t": 30, "b": 40})
    return figure


def _run_checks(spec: CoextensionSpec, fn, n: int, tol: float, lc_tol: float) -> list:
    borders = boundaries_of(spec)
    reports = check_axioms_grid(fn, n, tol, borders)
    reports.append(check_left_continuity(fn, borders, lc_tol))
    if isinstance(spec, ArchCoextensionSpec):
        reports.append(arch_coextension.verify_commuting(spec, tol=tol))
    else:
        reports.append(semilattice_coextension.verify_idempotency(spec, tol=max(tol, 1e-12)))
    if spec.expansion is not None:
        reports.append(recover_base(fn, spec, tol=tol))
    return reports


def main() -> None:
    st.set_page_config(page_title="T-norm coextensions", layout="wide")
    st.title("T-norm coextensions")
    st.caption("Left-continuous t-norms built from a finite tomonoid, a partition of [0, 1] and class data")

    settings = load_settings()
    spec_dir = settings.spec_dir
    files = _spec_files(spec_dir)

    with st.sidebar:
        st.markdown("### Spec")
        choice = st.selectbox("Spec file", [path.name for path in files], index=0 if files else None)
        uploaded = st.file_uploader("or upload a .spec file", type=["spec", "txt"])
        grid_n = st.slider("Grid points per axis", 21, 401, HEATMAP_N, step=20)

    try:
        if uploaded is not None:
            source = uploaded.name
            doc = _load_uploaded(uploaded.getvalue().decode("utf-8"), spec_dir)
        elif choice:
            source = choice
            doc = load_spec(spec_dir / choice)
        else:
            st.info(f"No spec files in {spec_dir}. Upload one from the sidebar.")
            return
    except (SpecParseError, UnicodeDecodeError) as exc:
        ERROR_LOGGER.exception("Spec load failed: source=%s", uploaded.name if uploaded else choice)
        st.error(f"Could not read the spec: {exc}")
        return
    APP_LOGGER.info("Spec loaded in explorer: source=%s kind=%s", source, doc.kind.value)

    spec = doc.coextension
    if spec is None:
        st.warning("This file holds a tomonoid table only. Use `python -m src.cli check` on it.")
        st.dataframe([{str(j): entry for j, entry in enumerate(row)} for row in doc.table], use_container_width=True)
        return

    report = validate_any(spec)
    if not report.ok:
        st.error("The spec is not valid.")
        st.dataframe(validation_frame(report), use_container_width=True, hide_index=True)
        return

    left, right = st.columns(2)
    with left:
        st.markdown("### Quotient tomonoid")
        if spec.quotient is not None:
            st.dataframe(_quotient_rows(spec), use_container_width=True)
        else:
            st.write(f"Built over `{spec.expansion.base_path}` expanded at {list(spec.expansion.points)}")
        st.markdown("### Classes")
        st.dataframe(
            [{"class": index, "interval": shape.describe()} for index, shape in enumerate(spec.partition.classes)],
            use_container_width=True,
            hide_index=True,
        )
    with right:
        st.markdown("### Class pairs")
        st.dataframe(case_frame(_case_rows(spec)), use_container_width=True, hide_index=True)

    fn = evaluator_for(spec)
    try:
        st.markdown("### Values")
        st.plotly_chart(_heatmap(fn, grid_n), use_container_width=True)
        cut_b = st.slider("Cut at b", 0.0, 1.0, 0.9, step=0.005)
        st.plotly_chart(_cut(fn, cut_b, max(grid_n, 401)), use_container_width=True)
    except ParameterRangeError as exc:
        ERROR_LOGGER.exception("Evaluation failed: source=%s", source)
        st.error(f"Evaluation failed: {exc}")
        return

    st.markdown("### Point")
    col_a, col_b = st.columns(2)
    a = col_a.number_input("a", 0.0, 1.0, 0.5, step=0.01, format="%.6f")
    b = col_b.number_input("b", 0.0, 1.0, 0.9, step=0.01, format="%.6f")
    st.metric("a * b", f"{float(fn(np.array([a]), np.array([b]))[0]):.15g}")

    st.markdown("### Checks")
    if st.button("Run checks", type="primary"):
        with st.spinner("Checking axioms on the grid"):
            reports = _run_checks(spec, fn, min(grid_n, settings.grid_n), settings.tol, settings.lc_tol)
        frame = grid_reports_frame(reports)
        passed = all(item.passed for item in reports)
        AUDIT_LOGGER.info("VERIFY %s source=%s n=%d", "pass" if passed else "fail", source, min(grid_n, settings.grid_n))
        if passed:
            st.success("All checks passed.")
        else:
            st.error("Some checks failed.")
        st.dataframe(frame, use_container_width=True, hide_index=True)
        st.download_button(
            "Download CSV",
            to_csv_text(frame),
            file_name=f"{Path(source).stem}_checks.csv",
            mime="text/csv",
        )


if __name__ == "__main__":
    main()
