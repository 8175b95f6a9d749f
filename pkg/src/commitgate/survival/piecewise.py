"""Piecewise-constant exponential hazard model over split episodes.

Each panel row (start, stop] is split at the cut boundaries; interval k
spans (c_{k-1}, c_k] with c_0 = 0. The full log-likelihood
sum[Y*(a_k + x.beta) - exposure*exp(a_k + x.beta)] is maximized jointly
over the interval log-hazards a and the coefficients beta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import _core
from ..errors import CollinearityError, DataError
from .cox import SEPARATION_BOUND, default_cuts
from .newton import maximize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PWEFit:
    covariate_names: tuple
    beta: tuple
    se_beta: tuple
    cuts: tuple
    interval_log_hazards: tuple
    se_log_hazards: tuple
    loglik: float
    converged: bool
    iterations: int
    n_episodes: int
    n_events: int


def split_episodes(start, stop, y, x, cuts: Sequence[float]):
    """Split rows at cut boundaries into (exposure, event, interval, x) rows."""
    start = np.asarray(start, dtype=float)
    stop = np.asarray(stop, dtype=float)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    cuts = [float(c) for c in cuts]
    if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])) or cuts[0] <= 0:
        raise DataError("cuts must be positive and strictly increasing")
    if float(stop.max()) > cuts[-1] + 1e-12:
        raise DataError(
            f"cuts must cover the observed duration: max stop {stop.max()} exceeds {cuts[-1]}"
        )
    bounds = [0.0] + cuts

    exposures, events, intervals, rows = [], [], [], []
    for i in range(len(start)):
        for k in range(len(cuts)):
            lo, hi = bounds[k], bounds[k + 1]
            overlap = min(stop[i], hi) - max(start[i], lo)
            if overlap <= 0:
                continue
            exposures.append(overlap)
            events.append(1.0 if (y[i] == 1.0 and lo < stop[i] <= hi) else 0.0)
            intervals.append(k)
            rows.append(i)
    return (
        np.array(exposures, dtype=float),
        np.array(events, dtype=float),
        np.array(intervals, dtype=np.int64),
        x[rows],
    )


def fit_piecewise_exponential(
    start,
    stop,
    y,
    x=None,
    names: Sequence[str] | None = None,
    *,
    cuts: Sequence[float] | None = None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> PWEFit:
    """Fit the model; default cuts are deciles of observed event times."""
    start = np.asarray(start, dtype=float)
    stop = np.asarray(stop, dtype=float)
    y = np.asarray(y, dtype=float)
    if x is None:
        x = np.empty((len(start), 0))
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n_cov = x.shape[1]
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(n_cov)]
    if len(names) != n_cov:
        raise DataError("covariate name count does not match the matrix")

    if cuts is None:
        cuts = default_cuts(stop, y)
    cuts = [float(c) for c in cuts]
    exposure, event, interval, x_split = split_episodes(start, stop, y, x, cuts)
    n_intervals = len(cuts)

    per_interval = np.bincount(interval, weights=exposure, minlength=n_intervals)
    bounds = [0.0] + cuts
    for k in range(n_intervals):
        if per_interval[k] <= 0:
            raise DataError(
                f"interval {k + 1} ({bounds[k]}, {bounds[k + 1]}] has zero exposure"
            )
    total_events = float(event.sum())
    if total_events < 1:
        raise DataError("no events in panel")

    if n_cov:
        mu = x_split.mean(axis=0)
        sd = x_split.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        xs = (x_split - mu) / scale
    else:
        mu = np.zeros(0)
        scale = np.ones(0)
        xs = x_split

    a0 = math.log(total_events / float(exposure.sum()))
    theta0 = np.concatenate([np.full(n_intervals, a0), np.zeros(n_cov)])

    def objective(theta):
        return _core.pwe_loglik_grad_info(
            exposure, event, interval, xs, theta[:n_intervals], theta[n_intervals:]
        )

    try:
        result = maximize(objective, theta0, tol=tol, max_iter=max_iter)
    except np.linalg.LinAlgError:
        raise CollinearityError(
            names, f"singular information over covariates: {', '.join(names)}"
        )

    a_std = result.theta[:n_intervals]
    beta_std = result.theta[n_intervals:]
    converged = result.converged
    if n_cov and np.any(np.abs(beta_std) > SEPARATION_BOUND):
        converged = False
        log.warning("separation suspected in piecewise-exponential fit")

    try:
        cov_std = np.linalg.inv(result.info)
    except np.linalg.LinAlgError:
        raise CollinearityError(
            names, f"singular information over covariates: {', '.join(names)}"
        )

    # back-transform: beta = beta_std/scale, a_k = a_std_k - sum_j beta_std_j mu_j/scale_j
    shift = mu / scale
    beta = beta_std / scale if n_cov else beta_std
    a = a_std - float(beta_std @ shift) if n_cov else a_std
    transform = np.zeros((n_intervals + n_cov, n_intervals + n_cov))
    transform[:n_intervals, :n_intervals] = np.eye(n_intervals)
    if n_cov:
        transform[:n_intervals, n_intervals:] = -np.tile(shift, (n_intervals, 1))
        transform[n_intervals:, n_intervals:] = np.diag(1.0 / scale)
    cov = transform @ cov_std @ transform.T
    se_all = np.sqrt(np.maximum(np.diag(cov), 0.0))

    return PWEFit(
        covariate_names=tuple(names),
        beta=tuple(float(v) for v in beta),
        se_beta=tuple(float(v) for v in se_all[n_intervals:]),
        cuts=tuple(cuts),
        interval_log_hazards=tuple(float(v) for v in a),
        se_log_hazards=tuple(float(v) for v in se_all[:n_intervals]),
        loglik=float(result.loglik),
        converged=converged,
        iterations=result.iterations,
        n_episodes=len(exposure),
        n_events=int(total_events),
    )
