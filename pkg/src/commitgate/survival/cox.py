"""Cox proportional hazards with time-varying covariates.

Panel rows are counting-process intervals (start, stop] with the event
flag at stop. Covariates are standardized internally for optimizer
conditioning and the estimates mapped back, which also makes the fit
scaling-equivariant. Ties use Efron (default) or Breslow.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import _core
from ..errors import CollinearityError, ConvergenceError, DataError
from .gammainc import chi2_sf
from .newton import maximize

log = logging.getLogger(__name__)

SEPARATION_BOUND = 15.0
EPV_THRESHOLD = 10.0


@dataclass(frozen=True)
class CoxFit:
    covariate_names: tuple
    beta: tuple
    exp_beta: tuple
    se: tuple
    z: tuple
    p: tuple
    loglik_null: float
    loglik_fit: float
    lr_stat: float
    wald_stat: float
    score_stat: float
    df: int
    baseline: tuple  # of (lo, hi, log-hazard or None) per interval
    converged: bool
    iterations: int
    ties: str
    n_rows: int
    n_events: int


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: int
    p: float


@dataclass(frozen=True)
class ModelTests:
    lr: TestResult
    wald: TestResult
    score: TestResult


def _as_arrays(start, stop, y, x):
    start = np.asarray(start, dtype=float)
    stop = np.asarray(stop, dtype=float)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not (len(start) == len(stop) == len(y) == x.shape[0]):
        raise DataError("panel arrays have mismatched lengths")
    if np.any(start >= stop):
        raise DataError("every row must satisfy start < stop")
    return start, stop, y, x


def _check_ties(ties: str) -> bool:
    if ties not in ("efron", "breslow"):
        raise DataError(f"unknown tie handling: {ties!r}")
    return ties == "efron"


def cox_parts(start, stop, y, x, beta, ties: str = "efron"):
    """(loglik, gradient, information) of the partial likelihood at beta."""
    start, stop, y, x = _as_arrays(start, stop, y, x)
    efron = _check_ties(ties)
    if y.sum() < 1:
        raise DataError("no events in panel")
    beta = np.asarray(beta, dtype=float)
    eta = x @ beta
    return _core.cox_loglik_grad_info(start, stop, y, x, eta, efron)


def partial_loglik(start, stop, y, x, beta, ties: str = "efron") -> float:
    return float(cox_parts(start, stop, y, x, beta, ties)[0])


def log_partial_likelihood(panel, beta, ties: str = "efron") -> float:
    """Partial log-likelihood of a Panel at the given coefficient vector."""
    start, stop, y, x, _ = panel.to_matrix()
    return partial_loglik(start, stop, y, x, beta, ties)


def _safe_exp(v: float) -> float:
    # nonconverged fits can carry |beta| past exp's range
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _standardize(x):
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    return (x - mu) / scale, mu, scale


def _singular_error(info, names) -> CollinearityError:
    diag = np.diag(info)
    flat = [names[j] for j in range(len(names)) if diag[j] < 1e-10]
    if flat:
        return CollinearityError(
            flat, f"singular information matrix; no contrast in: {', '.join(flat)}"
        )
    return CollinearityError(
        names, f"singular information matrix over covariates: {', '.join(names)}"
    )


def fit_cox(
    start,
    stop,
    y,
    x,
    names: Sequence[str] | None = None,
    *,
    ties: str = "efron",
    tol: float = 1e-8,
    max_iter: int = 100,
    baseline_cuts: Sequence[float] | None = None,
) -> CoxFit:
    """Maximize the partial likelihood by Newton-Raphson with step-halving."""
    start, stop, y, x = _as_arrays(start, stop, y, x)
    efron = _check_ties(ties)
    n, n_cov = x.shape
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(n_cov)]
    if len(names) != n_cov:
        raise DataError("covariate name count does not match the matrix")
    n_events = int(y.sum())
    if n_events < 1:
        raise DataError("no events in panel")
    if n_cov == 0:
        raise DataError("no covariates to fit")
    if n_events / n_cov < EPV_THRESHOLD:
        log.warning(
            "events per covariate is %.1f (< %.0f); estimates may be unstable",
            n_events / n_cov, EPV_THRESHOLD,
        )

    xs, mu, scale = _standardize(x)

    def objective(beta_std):
        return _core.cox_loglik_grad_info(start, stop, y, xs, xs @ beta_std, efron)

    loglik_null, grad_null, info_null = objective(np.zeros(n_cov))
    if not np.isfinite(loglik_null):
        raise DataError("non-finite partial likelihood at beta = 0")
    try:
        score_stat = float(grad_null @ np.linalg.solve(info_null, grad_null))
    except np.linalg.LinAlgError:
        raise _singular_error(info_null, names)

    try:
        result = maximize(objective, np.zeros(n_cov), tol=tol, max_iter=max_iter)
    except np.linalg.LinAlgError:
        raise _singular_error(info_null, names)

    beta_std = result.theta
    converged = result.converged
    if np.any(np.abs(beta_std) > SEPARATION_BOUND):
        converged = False
        log.warning(
            "separation suspected: |standardized beta| exceeds %.0f for %s",
            SEPARATION_BOUND,
            [names[j] for j in np.flatnonzero(np.abs(beta_std) > SEPARATION_BOUND)],
        )

    try:
        cov_std = np.linalg.inv(result.info)
    except np.linalg.LinAlgError:
        raise _singular_error(result.info, names)
    se_std = np.sqrt(np.maximum(np.diag(cov_std), 0.0))

    beta = beta_std / scale
    se = se_std / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.nan)
    p = np.array([math.erfc(abs(v) / math.sqrt(2)) if np.isfinite(v) else 1.0 for v in z])

    lr_stat = 2.0 * (result.loglik - loglik_null)
    wald_stat = float(beta_std @ result.info @ beta_std)

    baseline = _baseline_intervals(
        start, stop, y, x, beta, baseline_cuts
    )

    return CoxFit(
        covariate_names=tuple(names),
        beta=tuple(float(v) for v in beta),
        exp_beta=tuple(_safe_exp(float(v)) for v in beta),
        se=tuple(float(v) for v in se),
        z=tuple(float(v) for v in z),
        p=tuple(float(v) for v in p),
        loglik_null=float(loglik_null),
        loglik_fit=float(result.loglik),
        lr_stat=float(lr_stat),
        wald_stat=wald_stat,
        score_stat=score_stat,
        df=n_cov,
        baseline=baseline,
        converged=converged,
        iterations=result.iterations,
        ties=ties,
        n_rows=n,
        n_events=n_events,
    )


def fit_cox_tvc(
    panel,
    *,
    ties: str = "efron",
    tol: float = 1e-8,
    max_iter: int = 100,
    columns: Sequence[str] | None = None,
    baseline_cuts: Sequence[float] | None = None,
) -> CoxFit:
    """Fit the time-varying-covariate Cox model on a Panel."""
    start, stop, y, x, names = panel.to_matrix(columns)
    return fit_cox(
        start, stop, y, x, names,
        ties=ties, tol=tol, max_iter=max_iter, baseline_cuts=baseline_cuts,
    )


def breslow_increments(start, stop, y, x, beta):
    """Baseline cumulative-hazard increments d/S0(t) at each event time."""
    start, stop, y, x = _as_arrays(start, stop, y, x)
    beta = np.asarray(beta, dtype=float)
    eta = x @ beta
    center = float(eta.max()) if len(eta) else 0.0
    r = np.exp(eta - center)
    times = np.unique(stop[y == 1.0])
    out = []
    for t in times:
        at_risk = (start < t) & (t <= stop)
        s0 = float(r[at_risk].sum())
        d = int(((stop == t) & (y == 1.0)).sum())
        out.append((float(t), d * math.exp(-center) / s0))
    return out


def default_cuts(stop, y) -> list[float]:
    """Decile cuts of observed event times, extended to cover the data."""
    stop = np.asarray(stop, dtype=float)
    y = np.asarray(y, dtype=float)
    event_times = stop[y == 1.0]
    if len(event_times) == 0:
        raise DataError("no events in panel")
    quantiles = np.quantile(event_times, np.linspace(0.1, 1.0, 10))
    cuts = sorted(set(float(q) for q in quantiles))
    top = float(stop.max())
    if cuts[-1] < top:
        cuts.append(top)
    return cuts


def _baseline_intervals(start, stop, y, x, beta, cuts):
    if cuts is None:
        cuts = default_cuts(stop, y)
    else:
        cuts = [float(c) for c in cuts]
        if any(b <= a for a, b in zip(cuts, cuts[1:])) or (cuts and cuts[0] <= 0):
            raise DataError("baseline cuts must be positive and strictly increasing")
    increments = breslow_increments(start, stop, y, x, beta)
    baseline = []
    lo = 0.0
    for hi in cuts:
        mass = sum(dh for t, dh in increments if lo < t <= hi)
        width = hi - lo
        level = math.log(mass / width) if mass > 0 else None
        baseline.append((lo, hi, level))
        lo = hi
    return tuple(baseline)


def model_tests(fit: CoxFit) -> ModelTests:
    """LR, Wald, and score tests with chi-square upper-tail p-values."""
    if not fit.converged:
        raise ConvergenceError("model tests require a converged fit")
    df = fit.df
    return ModelTests(
        lr=TestResult(fit.lr_stat, df, chi2_sf(fit.lr_stat, df)),
        wald=TestResult(fit.wald_stat, df, chi2_sf(fit.wald_stat, df)),
        score=TestResult(fit.score_stat, df, chi2_sf(fit.score_stat, df)),
    )
