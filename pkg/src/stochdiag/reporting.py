"""Report files, text summaries and plot emission."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .diagnostics import KINDS, THRESHOLDS, DiagnosticReport
from .svg import scatter, unexpectedness_plot

_TITLES = {
    "mean": "Sample mean unexpectedness",
    "variance": "Sample variance unexpectedness",
    "skewness": "Sample skewness unexpectedness",
    "kurtosis": "Sample kurtosis unexpectedness",
}


def write_report(report: DiagnosticReport, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def read_report(path) -> DiagnosticReport:
    with open(path, encoding="utf-8") as fh:
        return DiagnosticReport.from_dict(json.load(fh))


def render_summary(report: DiagnosticReport) -> str:
    """Plain-text overview: counts per diagnostic and every |U| > 0.95 point."""
    lines = []
    if report.label:
        lines.append(report.label)
        lines.append("=" * len(report.label))
    lines.append(f"validation locations: {len(report.locations)}, "
                 f"replicates: {', '.join(str(int(r)) for r in report.replicates)}")
    lines.append("")
    lines.append(f"{'diagnostic':<10} {'n':>3} {'U<0':>4} {'U>0':>4} {'|U|>0.95':>9} {'|U|>0.995':>10} {'degen':>6}")
    summary = report.summary
    for kind in KINDS:
        if kind not in summary:
            continue
        s = summary[kind]
        lines.append(f"{kind:<10} {s['n']:>3} {s['n_negative']:>4} {s['n_positive']:>4} "
                     f"{s['n_abs_gt_095']:>9} {s['n_abs_gt_0995']:>10} {s['n_degenerate']:>6}")
    extremes = []
    for kind in KINDS:
        for r in report.results.get(kind, []):
            if r.U is not None and abs(r.U) > THRESHOLDS[0]:
                x = ", ".join(f"{v:.4g}" for v in report.locations[r.location])
                extremes.append(f"  {kind:<9} location {r.location:>3} (x = {x}): U = {r.U:.4f}")
    lines.append("")
    if extremes:
        lines.append("values with |U| > 0.95:")
        lines.extend(extremes)
    else:
        lines.append("no values with |U| > 0.95")
    det = report.deterministic
    if det:
        se = np.asarray(det["standardized_errors"])
        lines.append("")
        lines.append(f"standardised errors: n = {se.size}, max |e| = {np.max(np.abs(se)):.3f}, "
                     f"#|e| > 2 = {int(np.sum(np.abs(se) > 2))}")
        cov = dict(zip(det["coverage_levels"], det["coverage"]))
        if 0.95 in cov:
            lines.append(f"coverage of central 95% intervals: {cov[0.95]:.3f}")
    if report.errors:
        lines.append("")
        lines.append("errors:")
        for e in report.errors:
            lines.append(f"  {e['kind']} at location {e['location']}: {e['error']}")
    return "\n".join(lines) + "\n"


def emit_plots(report: DiagnosticReport, out_dir) -> list:
    """Write one SVG per diagnostic and input coordinate, plus the run-level plots."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    X = np.atleast_2d(report.locations)
    d = X.shape[1] if X.size else 1
    written = []
    for kind in KINDS:
        if kind not in report.results:
            continue
        idx, u = report.u_values(kind)
        for j in range(d):
            xs = X[idx, j] if idx.size else np.array([])
            name = f"{kind}_U_x{j + 1}.svg"
            svg = unexpectedness_plot(xs, u, title=f"{_TITLES[kind]} against x{j + 1}",
                                      xlabel=f"x{j + 1}" if d > 1 else "x")
            (out_dir / name).write_text(svg, encoding="utf-8")
            written.append(out_dir / name)
    det = report.deterministic
    if det:
        loc = np.asarray(det["run_location"], int)
        se = np.asarray(det["standardized_errors"])
        guides = [(0.0, "solid"), (2.0, "dashed"), (-2.0, "dashed")]
        for j in range(d):
            svg = scatter(X[loc, j], se, title="Individual standardised errors", xlabel=f"x{j + 1}",
                          ylabel="standardised error", hlines=guides)
            name = f"standardized_errors_x{j + 1}.svg"
            (out_dir / name).write_text(svg, encoding="utf-8")
            written.append(out_dir / name)
        pc = np.asarray(det["pivoted_cholesky_errors"])
        svg = scatter(np.arange(1, pc.size + 1), pc, title="Pivoted Cholesky errors",
                      xlabel="pivot order", ylabel="error", hlines=guides)
        (out_dir / "pivoted_cholesky_errors.svg").write_text(svg, encoding="utf-8")
        written.append(out_dir / "pivoted_cholesky_errors.svg")
        th, sm = np.asarray(det["qq_theoretical"]), np.asarray(det["qq_sample"])
        lim = (min(th.min(), sm.min()) - 0.2, max(th.max(), sm.max()) + 0.2)
        svg = scatter(th, sm, title="QQ plot of standardised errors", xlabel="theoretical quantile",
                      ylabel="sample quantile", xlim=lim, ylim=lim, line=(lim, lim))
        (out_dir / "qq.svg").write_text(svg, encoding="utf-8")
        written.append(out_dir / "qq.svg")
        lv, cv = np.asarray(det["coverage_levels"]), np.asarray(det["coverage"])
        svg = scatter(lv, cv, title="Credible interval coverage", xlabel="nominal level",
                      ylabel="observed coverage", xlim=(0, 1), ylim=(0, 1), line=((0, 1), (0, 1)))
        (out_dir / "coverage.svg").write_text(svg, encoding="utf-8")
        written.append(out_dir / "coverage.svg")
    return written
