# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled likelihood kernels; semantics identical to ``_purepy``.

The counting-process sweep and the episode accumulations run as C loops
over typed memoryviews; numpy is used only for argsort and buffer
allocation at the boundary.
"""

import numpy as np

from libc.math cimport exp, log

BACKEND = "compiled"


cdef inline void _add_row(
    Py_ssize_t row,
    double[::1] r,
    double[:, ::1] x,
    Py_ssize_t p,
    double* s0,
    double[::1] s1,
    double[:, ::1] s2,
) noexcept:
    cdef Py_ssize_t j, k
    cdef double ri = r[row]
    cdef double rx
    s0[0] += ri
    for j in range(p):
        s1[j] += ri * x[row, j]
    for j in range(p):
        rx = ri * x[row, j]
        for k in range(p):
            s2[j, k] += rx * x[row, k]


def cox_loglik_grad_info(start_in, stop_in, event_in, x_in, eta_in, bint efron=True):
    """Log partial likelihood, gradient, and observed information at eta."""
    start_arr = np.ascontiguousarray(start_in, dtype=np.float64)
    stop_arr = np.ascontiguousarray(stop_in, dtype=np.float64)
    event_arr = np.ascontiguousarray(event_in, dtype=np.float64)
    x_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    eta_arr = np.ascontiguousarray(eta_in, dtype=np.float64)

    cdef double[::1] start = start_arr
    cdef double[::1] stop = stop_arr
    cdef double[::1] event = event_arr
    cdef double[:, ::1] x = x_arr
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]

    cdef double center = float(eta_arr.max()) if n else 0.0
    eta_c_arr = eta_arr - center
    r_arr = np.exp(eta_c_arr)
    cdef double[::1] eta_c = eta_c_arr
    cdef double[::1] r = r_arr

    order_a_arr = np.ascontiguousarray(np.argsort(stop_arr, kind="stable")[::-1], dtype=np.int64)
    order_b_arr = np.ascontiguousarray(np.argsort(start_arr, kind="stable")[::-1], dtype=np.int64)
    cdef long long[::1] order_a = order_a_arr
    cdef long long[::1] order_b = order_b_arr

    ev_rows = np.flatnonzero(event_arr == 1.0)
    ev_order_arr = np.ascontiguousarray(
        ev_rows[np.argsort(stop_arr[ev_rows], kind="stable")[::-1]], dtype=np.int64
    )
    cdef long long[::1] ev_order = ev_order_arr
    cdef Py_ssize_t m = ev_order_arr.shape[0]

    grad_arr = np.zeros(p, dtype=np.float64)
    info_arr = np.zeros((p, p), dtype=np.float64)
    s1a_arr = np.zeros(p, dtype=np.float64)
    s1b_arr = np.zeros(p, dtype=np.float64)
    s2a_arr = np.zeros((p, p), dtype=np.float64)
    s2b_arr = np.zeros((p, p), dtype=np.float64)
    t1_arr = np.zeros(p, dtype=np.float64)
    t2_arr = np.zeros((p, p), dtype=np.float64)
    z_arr = np.zeros(p, dtype=np.float64)

    cdef double[::1] grad = grad_arr
    cdef double[:, ::1] info = info_arr
    cdef double[::1] s1a = s1a_arr
    cdef double[::1] s1b = s1b_arr
    cdef double[:, ::1] s2a = s2a_arr
    cdef double[:, ::1] s2b = s2b_arr
    cdef double[::1] t1 = t1_arr
    cdef double[:, ::1] t2 = t2_arr
    cdef double[::1] z = z_arr

    cdef double loglik = 0.0
    cdef double s0a = 0.0, s0b = 0.0, t0 = 0.0
    cdef double s0, phi, f, t
    cdef Py_ssize_t ia = 0, ib = 0, j = 0, k, d, level, row, jj, kk, idx

    while j < m:
        t = stop[ev_order[j]]
        k = j
        while k < m and stop[ev_order[k]] == t:
            k += 1
        d = k - j

        while ia < n and stop[order_a[ia]] >= t:
            _add_row(order_a[ia], r, x, p, &s0a, s1a, s2a)
            ia += 1
        while ib < n and start[order_b[ib]] >= t:
            _add_row(order_b[ib], r, x, p, &s0b, s1b, s2b)
            ib += 1

        s0 = s0a - s0b

        for idx in range(j, k):
            row = ev_order[idx]
            loglik += eta_c[row]
            for jj in range(p):
                grad[jj] += x[row, jj]

        if efron and d > 1:
            t0 = 0.0
            for jj in range(p):
                t1[jj] = 0.0
                for kk in range(p):
                    t2[jj, kk] = 0.0
            for idx in range(j, k):
                _add_row(ev_order[idx], r, x, p, &t0, t1, t2)
            for level in range(d):
                f = (<double> level) / (<double> d)
                phi = s0 - f * t0
                loglik -= log(phi)
                for jj in range(p):
                    z[jj] = ((s1a[jj] - s1b[jj]) - f * t1[jj]) / phi
                    grad[jj] -= z[jj]
                for jj in range(p):
                    for kk in range(p):
                        info[jj, kk] += (
                            ((s2a[jj, kk] - s2b[jj, kk]) - f * t2[jj, kk]) / phi
                            - z[jj] * z[kk]
                        )
        else:
            loglik -= d * log(s0)
            for jj in range(p):
                z[jj] = (s1a[jj] - s1b[jj]) / s0
                grad[jj] -= d * z[jj]
            for jj in range(p):
                for kk in range(p):
                    info[jj, kk] += d * (
                        (s2a[jj, kk] - s2b[jj, kk]) / s0 - z[jj] * z[kk]
                    )
        j = k

    return loglik, grad_arr, info_arr


def pwe_loglik_grad_info(exposure_in, event_in, interval_in, x_in, a_in, beta_in):
    """Piecewise-exponential log-likelihood over split episodes."""
    exposure_arr = np.ascontiguousarray(exposure_in, dtype=np.float64)
    event_arr = np.ascontiguousarray(event_in, dtype=np.float64)
    interval_arr = np.ascontiguousarray(interval_in, dtype=np.int64)
    x_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    a_arr = np.ascontiguousarray(a_in, dtype=np.float64)
    beta_arr = np.ascontiguousarray(beta_in, dtype=np.float64)

    cdef double[::1] exposure = exposure_arr
    cdef double[::1] event = event_arr
    cdef long long[::1] interval = interval_arr
    cdef double[:, ::1] x = x_arr
    cdef double[::1] a = a_arr
    cdef double[::1] beta = beta_arr

    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t n_intervals = a_arr.shape[0]
    cdef Py_ssize_t dim = n_intervals + p

    grad_arr = np.zeros(dim, dtype=np.float64)
    info_arr = np.zeros((dim, dim), dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double[:, ::1] info = info_arr

    cdef double loglik = 0.0
    cdef double eta, lam, resid
    cdef Py_ssize_t i, j, k, ki

    for i in range(n):
        ki = <Py_ssize_t> interval[i]
        eta = a[ki]
        for j in range(p):
            eta += x[i, j] * beta[j]
        lam = exposure[i] * exp(eta)
        loglik += event[i] * eta - lam
        resid = event[i] - lam

        grad[ki] += resid
        for j in range(p):
            grad[n_intervals + j] += x[i, j] * resid

        info[ki, ki] += lam
        for j in range(p):
            info[ki, n_intervals + j] += lam * x[i, j]
            info[n_intervals + j, ki] += lam * x[i, j]
        for j in range(p):
            for k in range(p):
                info[n_intervals + j, n_intervals + k] += lam * x[i, j] * x[i, k]

    return loglik, grad_arr, info_arr
