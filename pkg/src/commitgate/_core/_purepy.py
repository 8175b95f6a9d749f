"""Pure-Python (numpy) likelihood kernels; the fallback backend.

Both kernels return (loglik, gradient, observed information). The Cox
kernel evaluates the counting-process partial likelihood in one sweep over
event times processed in decreasing order: the risk-set sums at time t are
a difference of two running accumulations, rows with stop >= t minus rows
with start >= t, so the whole evaluation is O(n log n + n p^2).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure-python"


def _segment_sums(r, x, rx, rows):
    s0 = float(r[rows].sum())
    s1 = rx[rows].sum(axis=0)
    s2 = np.einsum("i,ij,ik->jk", r[rows], x[rows], x[rows])
    return s0, s1, s2


def cox_loglik_grad_info(start, stop, event, x, eta, efron=True):
    """Log partial likelihood, gradient, and observed information at eta.

    Risk set at event time t is {rows: start < t <= stop}. Ties use the
    Efron correction when ``efron`` else Breslow. eta is centered
    internally; the partial likelihood is invariant to the shift.
    """
    start = np.asarray(start, dtype=np.float64)
    stop = np.asarray(stop, dtype=np.float64)
    event = np.asarray(event, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    n, p = x.shape

    center = float(eta.max()) if n else 0.0
    eta_c = eta - center
    r = np.exp(eta_c)
    rx = r[:, None] * x

    order_a = np.argsort(stop, kind="stable")[::-1]
    order_b = np.argsort(start, kind="stable")[::-1]
    stops_a = stop[order_a]
    starts_b = start[order_b]

    ev_rows = np.flatnonzero(event == 1.0)
    ev_order = ev_rows[np.argsort(stop[ev_rows], kind="stable")[::-1]]
    ev_times = stop[ev_order]

    loglik = 0.0
    grad = np.zeros(p)
    info = np.zeros((p, p))
    s0a = s0b = 0.0
    s1a = np.zeros(p)
    s1b = np.zeros(p)
    s2a = np.zeros((p, p))
    s2b = np.zeros((p, p))
    ia = ib = 0
    j = 0
    m = len(ev_order)
    while j < m:
        t = ev_times[j]
        k = j
        while k < m and ev_times[k] == t:
            k += 1
        tied = ev_order[j:k]
        d = k - j

        ia2 = ia
        while ia2 < n and stops_a[ia2] >= t:
            ia2 += 1
        if ia2 > ia:
            d0, d1, d2 = _segment_sums(r, x, rx, order_a[ia:ia2])
            s0a += d0
            s1a += d1
            s2a += d2
            ia = ia2
        ib2 = ib
        while ib2 < n and starts_b[ib2] >= t:
            ib2 += 1
        if ib2 > ib:
            d0, d1, d2 = _segment_sums(r, x, rx, order_b[ib:ib2])
            s0b += d0
            s1b += d1
            s2b += d2
            ib = ib2

        s0 = s0a - s0b
        s1 = s1a - s1b
        s2 = s2a - s2b

        loglik += float(eta_c[tied].sum())
        grad += x[tied].sum(axis=0)
        if efron and d > 1:
            t0, t1, t2 = _segment_sums(r, x, rx, tied)
            for level in range(d):
                f = level / d
                phi = s0 - f * t0
                z = (s1 - f * t1) / phi
                loglik -= math.log(phi)
                grad -= z
                info += (s2 - f * t2) / phi - np.outer(z, z)
        else:
            z = s1 / s0
            loglik -= d * math.log(s0)
            grad -= d * z
            info += d * (s2 / s0 - np.outer(z, z))
        j = k

    return loglik, grad, info


def pwe_loglik_grad_info(exposure, event, interval, x, a, beta):
    """Piecewise-exponential full log-likelihood over split episodes.

    ll = sum[Y*(a_k + x.beta) - exposure*exp(a_k + x.beta)]; parameters are
    stacked (a_1..a_K, beta_1..beta_p) in gradient and information.
    """
    exposure = np.asarray(exposure, dtype=np.float64)
    event = np.asarray(event, dtype=np.float64)
    interval = np.asarray(interval, dtype=np.int64)
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    n_intervals = len(a)
    p = x.shape[1]

    eta = a[interval] + (x @ beta if p else np.zeros(len(event)))
    lam = exposure * np.exp(eta)
    loglik = float((event * eta - lam).sum())

    resid = event - lam
    grad = np.zeros(n_intervals + p)
    grad[:n_intervals] = np.bincount(interval, weights=resid, minlength=n_intervals)
    if p:
        grad[n_intervals:] = x.T @ resid

    info = np.zeros((n_intervals + p, n_intervals + p))
    info[:n_intervals, :n_intervals] = np.diag(
        np.bincount(interval, weights=lam, minlength=n_intervals)
    )
    if p:
        cross = np.zeros((n_intervals, p))
        np.add.at(cross, interval, lam[:, None] * x)
        info[:n_intervals, n_intervals:] = cross
        info[n_intervals:, :n_intervals] = cross.T
        info[n_intervals:, n_intervals:] = x.T @ (lam[:, None] * x)
    return loglik, grad, info
