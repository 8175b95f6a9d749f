"""Survival estimators: preprocessing, Cox TVC, piecewise exponential, hazard."""

from .cox import (
    CoxFit,
    ModelTests,
    TestResult,
    breslow_increments,
    cox_parts,
    default_cuts,
    fit_cox,
    fit_cox_tvc,
    log_partial_likelihood,
    model_tests,
    partial_loglik,
)
from .gammainc import chi2_sf, normal_sf, regularized_gamma_p, regularized_gamma_q
from .hazard import (
    default_bandwidth,
    nelson_aalen,
    read_hazard_csv,
    smoothed_hazard,
    smoothed_hazard_arrays,
    write_hazard_csv,
)
from .newton import NewtonResult, maximize
from .piecewise import PWEFit, fit_piecewise_exponential, split_episodes
from .preprocess import (
    SparseReport,
    VifResult,
    ZScoreReport,
    drop_sparse,
    vif_screen,
    vif_values,
    zscore_filter,
)

__all__ = [
    "CoxFit",
    "ModelTests",
    "TestResult",
    "breslow_increments",
    "cox_parts",
    "default_cuts",
    "fit_cox",
    "fit_cox_tvc",
    "log_partial_likelihood",
    "model_tests",
    "partial_loglik",
    "chi2_sf",
    "normal_sf",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "default_bandwidth",
    "nelson_aalen",
    "read_hazard_csv",
    "smoothed_hazard",
    "smoothed_hazard_arrays",
    "write_hazard_csv",
    "NewtonResult",
    "maximize",
    "PWEFit",
    "fit_piecewise_exponential",
    "split_episodes",
    "SparseReport",
    "VifResult",
    "ZScoreReport",
    "drop_sparse",
    "vif_screen",
    "vif_values",
    "zscore_filter",
]
