"""Monthly counting-process panel assembly and CSV round-trip.

One row per candidate per calendar month (UTC), anchored at the
developer's first-appearance month. Row i spans (i-1, i] months since
first appearance; count metrics are cumulative strictly before the month's
start, and Y marks the immigration month on the final row only.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import DataError
from ..identity import Denylists, IdentityMap
from ..ingest.events import EventStream
from ..lifecycle import CandidatePool, ImmigrationEvent
from ..months import month_of, month_start
from .activity import DEFAULT_FEATURE_LABELS, DEFAULT_NEWCOMER_LABELS, MetricIndex
from .offensive import Scorer

SECONDS_PER_YEAR = 86400 * 365.25

COVARIATE_COLUMNS = [
    "m01_pr_open",
    "m02_pr_review",
    "m03_commit",
    "m04_days_active",
    "m05_issue_open",
    "m06_issue_triage",
    "m07_all_comment",
    "m08_communicator",
    "m09_from_company",
    "m10_issue_org",
    "m11_issue_comment_org",
    "m12_commit_org",
    "m13_commit_comment_org",
    "m14_comment_newcomer",
    "m15_file_modified",
    "m16_issue_new_feature",
    "m17_merge_ratio",
    "m18_comment_offensive",
]
CONTROL_COLUMNS = ["project_developers", "project_age_years"]
ALL_COVARIATES = COVARIATE_COLUMNS + CONTROL_COLUMNS
CSV_COLUMNS = ["dev", "month_index"] + ALL_COVARIATES + ["start", "stop", "y"]


@dataclass(frozen=True)
class PanelRow:
    dev: str
    month_index: int
    start: float
    stop: float
    x: dict  # covariate name -> value; None encodes an absent org metric
    y: int

    def __post_init__(self):
        if self.month_index < 1:
            raise ValueError("month_index starts at 1")
        if not self.start < self.stop:
            raise ValueError("row interval must satisfy start < stop")
        if self.y not in (0, 1):
            raise ValueError("y is a 0/1 event indicator")


@dataclass(frozen=True)
class Panel:
    rows: tuple

    def covariate_names(self) -> list[str]:
        """Columns available on every row; absent org metrics drop out."""
        return [
            name
            for name in ALL_COVARIATES
            if all(row.x.get(name) is not None for row in self.rows)
        ]

    def events(self) -> int:
        return sum(row.y for row in self.rows)

    def to_matrix(self, names: Sequence[str] | None = None):
        """(start, stop, y, X, names) as numpy arrays for the estimators."""
        import numpy as np

        names = list(names) if names is not None else self.covariate_names()
        start = np.array([row.start for row in self.rows], dtype=float)
        stop = np.array([row.stop for row in self.rows], dtype=float)
        y = np.array([row.y for row in self.rows], dtype=float)
        x = np.empty((len(self.rows), len(names)), dtype=float)
        for j, name in enumerate(names):
            for i, row in enumerate(self.rows):
                value = row.x.get(name)
                if value is None:
                    raise DataError(f"covariate {name} is absent on some rows")
                x[i, j] = float(value)
        return start, stop, y, x, names

    def validate(self) -> None:
        """Tiling, single-final-event, and interval invariants."""
        by_dev: dict[str, list[PanelRow]] = defaultdict(list)
        for row in self.rows:
            by_dev[row.dev].append(row)
        for dev, rows in by_dev.items():
            rows = sorted(rows, key=lambda r: r.month_index)
            for expected, row in enumerate(rows, start=1):
                if row.month_index != expected:
                    raise DataError(f"panel rows for {dev} do not tile: gap at {expected}")
                if row.start != expected - 1 or row.stop != expected:
                    raise DataError(f"panel row {dev}:{expected} has wrong interval bounds")
            events = [r for r in rows if r.y == 1]
            if len(events) > 1 or (events and events[0].month_index != len(rows)):
                raise DataError(f"panel rows for {dev} violate the single-final-event rule")


def build_panel(
    stream: EventStream,
    ids: IdentityMap,
    pool: CandidatePool,
    immigrations: Sequence[ImmigrationEvent],
    collection_date: datetime,
    *,
    org_stream: EventStream | None = None,
    newcomer_labels: Iterable[str] = DEFAULT_NEWCOMER_LABELS,
    feature_labels: Iterable[str] = DEFAULT_FEATURE_LABELS,
    scorer: Scorer | None = None,
    denylists: Denylists | None = None,
) -> Panel:
    """Assemble the panel for every candidate in the pool.

    Deterministic given its inputs; metrics at month i use only events
    strictly before that month's start.
    """
    index = MetricIndex(
        stream,
        ids,
        org_stream=org_stream,
        newcomer_labels=newcomer_labels,
        feature_labels=feature_labels,
        scorer=scorer,
        denylists=denylists,
    )
    outcomes = {ev.dev: ev for ev in immigrations}

    devs_by_month: dict[int, set] = defaultdict(set)
    project_t0: datetime | None = None
    for event in stream:
        dev = ids.get_id(event.actor)
        if dev is not None:
            devs_by_month[month_of(event.time)].add(dev)
        if project_t0 is None or event.time < project_t0:
            project_t0 = event.time

    rows: list[PanelRow] = []
    for dev in sorted(pool.candidates):
        outcome = outcomes.get(dev)
        if outcome is None:
            raise DataError(f"candidate {dev} has no immigration outcome")
        first_month = month_of(outcome.first_appearance)
        end_time = outcome.immigration_time or collection_date
        last_month = month_of(end_time)
        n_months = last_month - first_month + 1
        if n_months < 1:
            raise DataError(f"candidate {dev} has zero observable months")
        for i in range(1, n_months + 1):
            absolute = first_month + i - 1
            cutoff = month_start(absolute)
            m10, m11, m12, m13 = index.org_counts(dev, cutoff)
            issue_c, pr_c, commit_c = index.comment_counts(dev, cutoff)
            age_seconds = (cutoff - project_t0).total_seconds() if project_t0 else 0.0
            x = {
                "m01_pr_open": index.pr_open(dev, cutoff),
                "m02_pr_review": index.pr_review(dev, cutoff),
                "m03_commit": index.commits(dev, cutoff),
                "m04_days_active": index.days_active(dev, cutoff),
                "m05_issue_open": index.issue_open(dev, cutoff),
                "m06_issue_triage": index.issue_triage(dev, cutoff),
                "m07_all_comment": issue_c + pr_c + commit_c,
                "m08_communicator": index.communicators(dev, cutoff),
                "m09_from_company": index.from_company(dev, cutoff),
                "m10_issue_org": m10,
                "m11_issue_comment_org": m11,
                "m12_commit_org": m12,
                "m13_commit_comment_org": m13,
                "m14_comment_newcomer": index.newcomer_comments(dev, cutoff),
                "m15_file_modified": index.files_modified(dev, cutoff),
                "m16_issue_new_feature": index.feature_issues(dev, cutoff),
                "m17_merge_ratio": index.merge_ratio(dev, cutoff),
                "m18_comment_offensive": index.offensive_comments(dev, cutoff),
                "project_developers": len(devs_by_month.get(absolute, ())),
                "project_age_years": max(age_seconds, 0.0) / SECONDS_PER_YEAR,
            }
            y = 1 if (outcome.immigration_time is not None and i == n_months) else 0
            rows.append(
                PanelRow(dev=dev, month_index=i, start=float(i - 1), stop=float(i), x=x, y=y)
            )

    panel = Panel(rows=tuple(rows))
    panel.validate()
    return panel


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def write_panel_csv(panel: Panel, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in panel.rows:
            record = [row.dev, row.month_index]
            record += [_format_cell(row.x.get(name)) for name in ALL_COVARIATES]
            record += [repr(row.start), repr(row.stop), row.y]
            writer.writerow(record)


def read_panel_csv(path: Path) -> Panel:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise DataError(f"panel file {path} has unexpected columns")
        for record in reader:
            x = {name: _parse_cell(record[name]) for name in ALL_COVARIATES}
            rows.append(
                PanelRow(
                    dev=record["dev"],
                    month_index=int(record["month_index"]),
                    start=float(record["start"]),
                    stop=float(record["stop"]),
                    x=x,
                    y=int(record["y"]),
                )
            )
    return Panel(rows=tuple(rows))
