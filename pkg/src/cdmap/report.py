"""Report rendering: structured JSON and plain-text tables.

The text rendering mirrors the usual layout of such studies: per-grouping
means/SDs per method, a normality p-value table, omnibus results, and the
pairwise post-hoc table (present only where the omnibus passed).
"""

from __future__ import annotations

import json

from .stats import AnalysisReport, TestResult


def _fmt_p(p: float) -> str:
    if p < 1e-3:
        return f"{p:.2e}"
    return f"{p:.3f}"


def test_result_to_dict(res: TestResult) -> dict:
    return {
        "test": res.test_name,
        "statistic": res.statistic,
        "p_value": res.p_value,
        "alpha": res.alpha_used,
        "passed": res.passed,
    }


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "grouping": report.grouping,
        "methods": list(report.methods),
        "descriptives": {
            m: {"mean": mu, "sd": sd}
            for m, mu, sd in zip(report.methods, report.means, report.sds)
        },
        "normality": {m: test_result_to_dict(r) for m, r in report.normality.items()},
        "omnibus": test_result_to_dict(report.omnibus),
        "parametric_branch": report.parametric,
        "alpha": report.alpha,
        "alpha_posthoc": report.alpha_posthoc,
        "posthoc": (
            None
            if report.posthoc is None
            else {f"{a} vs {b}": test_result_to_dict(r) for (a, b), r in report.posthoc.items()}
        ),
    }


def analysis_to_json(analysis: dict) -> str:
    """Serialize the full analyze output ({metric: {grouping: report}})."""
    return json.dumps(
        {
            metric: {label: report_to_dict(rep) for label, rep in groups.items()}
            for metric, groups in analysis.items()
        },
        indent=2,
    )


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(headers)
    ]
    def fmt_row(cells):
        return " | ".join(str(c).ljust(w) for c, w in zip(cells, widths))

    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt_row(headers), sep, *(fmt_row(r) for r in rows)])


def render_metric(metric: str, groups: dict) -> str:
    """Text tables for one metric across all groupings."""
    methods = next(iter(groups.values())).methods
    out = [f"== {metric} =="]

    rows = []
    for label, rep in groups.items():
        rows.append(
            [label]
            + [f"{mu:.3f} ({sd:.3f})" for mu, sd in zip(rep.means, rep.sds)]
        )
    out.append("Means (SD) per method")
    out.append(_table(["group", *methods], rows))

    rows = [
        [label]
        + [
            _fmt_p(rep.normality[m].p_value) if m in rep.normality else "-"
            for m in methods
        ]
        for label, rep in groups.items()
    ]
    out.append("\nNormality (Shapiro-Wilk p-values)")
    out.append(_table(["group", *methods], rows))

    rows = [
        [
            label,
            rep.omnibus.test_name,
            f"{rep.omnibus.statistic:.4g}",
            _fmt_p(rep.omnibus.p_value),
            "yes" if rep.omnibus.passed else "no",
        ]
        for label, rep in groups.items()
    ]
    out.append("\nOmnibus tests")
    out.append(_table(["group", "test", "statistic", "p", "passed"], rows))

    rows = []
    for label, rep in groups.items():
        if rep.posthoc is None:
            continue
        for (a, b), res in rep.posthoc.items():
            rows.append(
                [
                    label,
                    f"{a} vs {b}",
                    res.test_name,
                    _fmt_p(res.p_value),
                    "yes" if res.passed else "no",
                ]
            )
    out.append(f"\nPost-hoc pairwise tests (alpha = {next(iter(groups.values())).alpha_posthoc:.3f})")
    out.append(_table(["group", "pair", "test", "p", "passed"], rows) if rows else "(none: omnibus not passed)")
    return "\n".join(out)


def render_analysis(analysis: dict) -> str:
    return "\n\n".join(render_metric(metric, groups) for metric, groups in analysis.items())
