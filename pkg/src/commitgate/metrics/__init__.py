"""Developer-month metrics M1-M18, controls, and panel assembly."""

from .activity import (
    DEFAULT_FEATURE_LABELS,
    DEFAULT_NEWCOMER_LABELS,
    MetricIndex,
    compute_merge_ratio,
    count_communicators,
    count_issue_triage,
    count_new_feature_issues,
    count_newcomer_comments,
    count_org_scoped,
)
from .offensive import LexiconScorer, Scorer, score_offensive
from .panel import (
    ALL_COVARIATES,
    CONTROL_COLUMNS,
    COVARIATE_COLUMNS,
    CSV_COLUMNS,
    Panel,
    PanelRow,
    build_panel,
    read_panel_csv,
    write_panel_csv,
)

__all__ = [
    "DEFAULT_FEATURE_LABELS",
    "DEFAULT_NEWCOMER_LABELS",
    "MetricIndex",
    "compute_merge_ratio",
    "count_communicators",
    "count_issue_triage",
    "count_new_feature_issues",
    "count_newcomer_comments",
    "count_org_scoped",
    "LexiconScorer",
    "Scorer",
    "score_offensive",
    "ALL_COVARIATES",
    "CONTROL_COLUMNS",
    "COVARIATE_COLUMNS",
    "CSV_COLUMNS",
    "Panel",
    "PanelRow",
    "build_panel",
    "read_panel_csv",
    "write_panel_csv",
]
