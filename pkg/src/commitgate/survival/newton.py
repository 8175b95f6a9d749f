"""Newton-Raphson maximization with step-halving.

The objective callable returns (loglik, gradient, observed information);
the information matrix is the negative Hessian, so the Newton direction is
solve(info, grad). A step that fails to improve the log-likelihood is
halved; convergence is declared when the log-likelihood change falls below
tol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class NewtonResult:
    theta: np.ndarray
    loglik: float
    grad: np.ndarray
    info: np.ndarray
    iterations: int
    converged: bool
    message: str = ""


def maximize(
    objective: Callable,
    theta0,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    max_halvings: int = 30,
) -> NewtonResult:
    theta = np.asarray(theta0, dtype=float).copy()
    loglik, grad, info = objective(theta)
    if not np.isfinite(loglik):
        raise ValueError("objective is non-finite at the starting point")

    iterations = 0
    for iterations in range(1, max_iter + 1):
        direction = np.linalg.solve(info, grad)
        step = 1.0
        accepted = False
        new_loglik = loglik
        for _ in range(max_halvings):
            trial = theta + step * direction
            trial_loglik, trial_grad, trial_info = objective(trial)
            if np.isfinite(trial_loglik) and trial_loglik >= loglik:
                theta, new_loglik = trial, trial_loglik
                grad, info = trial_grad, trial_info
                accepted = True
                break
            step /= 2.0
        if not accepted:
            # no uphill step found: either at the optimum or stuck
            converged = abs(trial_loglik - loglik) < tol if np.isfinite(trial_loglik) else False
            return NewtonResult(
                theta, loglik, grad, info, iterations, converged,
                "" if converged else "step-halving failed to improve the log-likelihood",
            )
        if abs(new_loglik - loglik) < tol:
            return NewtonResult(theta, new_loglik, grad, info, iterations, True)
        loglik = new_loglik

    return NewtonResult(
        theta, loglik, grad, info, iterations, False,
        f"no convergence within {max_iter} iterations",
    )
