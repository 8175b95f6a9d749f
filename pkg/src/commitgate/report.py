"""Coefficient-table rendering for fitted hazard models.

One row per covariate with Coef, EXP(Coef), SE(Coef), Z and
significance stars, plus a footer with the three global tests, in the
style of an R survival summary. Two formats: markdown for display and
csv for machines. The csv round-trips through read_coefficient_csv.
"""

from __future__ import annotations

import csv
import io

from .errors import ConfigError, DataError
from .survival import model_tests

STAR_LEVELS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))

NONCONVERGED_BANNER = (
    "NONCONVERGED: estimates did not converge; significance suppressed"
)

CSV_COLUMNS = ["name", "coef", "exp_coef", "se", "z", "p", "stars"]

TABLE_FORMATS = ("markdown", "csv")


def stars_for(p: float) -> str:
    """Significance marker: *** p<0.001, ** p<0.01, * p<0.05."""
    for cut, mark in STAR_LEVELS:
        if p < cut:
            return mark
    return ""


def format_p(p: float) -> str:
    # display floor; smaller values are not meaningfully distinguishable
    if p < 2e-16:
        return "<2e-16"
    return f"{p:.3g}"


def _footer_lines(fit) -> list:
    tests = model_tests(fit)
    labelled = [
        ("Likelihood ratio test", tests.lr),
        ("Wald test", tests.wald),
        ("Score (logrank) test", tests.score),
    ]
    return [
        f"{label}: {t.statistic:.4g} on {t.df} df, p={format_p(t.p)}"
        for label, t in labelled
    ]


def _render_markdown(fit) -> str:
    lines = []
    if not fit.converged:
        lines.append(NONCONVERGED_BANNER)
        lines.append("")
    lines.append("| Covariate | Coef | EXP(Coef) | SE(Coef) | Z |")
    lines.append("| --- | ---: | ---: | ---: | ---: |")
    for i, name in enumerate(fit.covariate_names):
        mark = stars_for(fit.p[i]) if fit.converged else ""
        lines.append(
            f"| {name} | {fit.beta[i]:.2f}{mark} | {fit.exp_beta[i]:.2f}"
            f" | {fit.se[i]:.2f} | {fit.z[i]:.2f} |"
        )
    if fit.converged:
        lines.append("")
        lines.extend(_footer_lines(fit))
        lines.append("")
        lines.append("*** p<0.001, ** p<0.01, * p<0.05")
    return "\n".join(lines) + "\n"


def _render_csv(fit) -> str:
    out = io.StringIO()
    if not fit.converged:
        out.write(f"# {NONCONVERGED_BANNER}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, name in enumerate(fit.covariate_names):
        mark = stars_for(fit.p[i]) if fit.converged else ""
        writer.writerow(
            [
                name,
                repr(float(fit.beta[i])),
                repr(float(fit.exp_beta[i])),
                repr(float(fit.se[i])),
                repr(float(fit.z[i])),
                repr(float(fit.p[i])),
                mark,
            ]
        )
    if fit.converged:
        for line in _footer_lines(fit):
            out.write(f"# {line}\n")
    return out.getvalue()


def render_coefficient_table(fit, format: str = "markdown") -> str:
    """Render a fitted model as a coefficient table in the given format."""
    if format == "markdown":
        return _render_markdown(fit)
    if format == "csv":
        return _render_csv(fit)
    raise ConfigError(f"unknown table format: {format!r}")


def read_coefficient_csv(text: str) -> list:
    """Parse the csv rendering back into a list of row dicts."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header != CSV_COLUMNS:
        raise DataError(f"unexpected coefficient table header: {header}")
    rows = []
    for record in reader:
        if len(record) != len(CSV_COLUMNS):
            raise DataError(f"malformed coefficient row: {record}")
        rows.append(
            {
                "name": record[0],
                "coef": float(record[1]),
                "exp_coef": float(record[2]),
                "se": float(record[3]),
                "z": float(record[4]),
                "p": float(record[5]),
                "stars": record[6],
            }
        )
    return rows
