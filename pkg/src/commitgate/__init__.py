"""commitgate: mine repository histories for committer immigration.

The package ingests git logs and collaboration events, resolves author
identities, dates each contributor's promotion to committer, assembles
monthly activity panels, and fits hazard models (Cox with time-varying
covariates, piecewise exponential) over them. `run_pipeline` drives the
whole chain from a RunConfig; the stage modules are importable on their
own for partial or programmatic use.
"""

__version__ = "0.1.0"

from ._core import backend_name
from .config import RepoSpec, RunConfig
from .errors import (
    AuthError,
    CollinearityError,
    CommitgateError,
    ConfigError,
    ConvergenceError,
    DataError,
    FetchError,
    ParseError,
    StageError,
)
from .identity import (
    Affiliation,
    DevIdentity,
    IdentityMap,
    infer_affiliation,
    load_denylists,
    resolve_identities,
)
from .ingest import Event, fetch_events, normalize, parse_git_log
from .lifecycle import (
    CandidatePool,
    ImmigrationEvent,
    cliffs_delta,
    committer_proportion,
    detect_immigrations,
    immigration_rate,
    mann_whitney_u,
)
from .metrics import Panel, PanelRow, build_panel
from .pipeline import ReportBundle, run_pipeline
from .report import read_coefficient_csv, render_coefficient_table
from .survival import (
    CoxFit,
    PWEFit,
    fit_cox,
    fit_cox_tvc,
    fit_piecewise_exponential,
    model_tests,
    smoothed_hazard,
    vif_screen,
    zscore_filter,
)

__all__ = [
    "__version__",
    "backend_name",
    "RepoSpec",
    "RunConfig",
    "AuthError",
    "CollinearityError",
    "CommitgateError",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "FetchError",
    "ParseError",
    "StageError",
    "Affiliation",
    "DevIdentity",
    "IdentityMap",
    "infer_affiliation",
    "load_denylists",
    "resolve_identities",
    "Event",
    "fetch_events",
    "normalize",
    "parse_git_log",
    "CandidatePool",
    "ImmigrationEvent",
    "cliffs_delta",
    "committer_proportion",
    "detect_immigrations",
    "immigration_rate",
    "mann_whitney_u",
    "Panel",
    "PanelRow",
    "build_panel",
    "ReportBundle",
    "run_pipeline",
    "read_coefficient_csv",
    "render_coefficient_table",
    "CoxFit",
    "PWEFit",
    "fit_cox",
    "fit_cox_tvc",
    "fit_piecewise_exponential",
    "model_tests",
    "smoothed_hazard",
    "vif_screen",
    "zscore_filter",
]
