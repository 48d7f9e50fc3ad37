# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled value iteration sweeps. Semantics match fallback.py exactly:
Jacobi updates, residual = max absolute cell change, stop when residual < tol."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log

BACKEND = "native"


def hard_vi(double[::1] values, double[:, ::1] costs, cnp.uint8_t[::1] absorbing,
            long[:, :, ::1] idx, double[:, :, ::1] wts, double tol, long max_sweeps):
    cdef Py_ssize_t K = costs.shape[0]
    cdef Py_ssize_t C = costs.shape[1]
    cdef Py_ssize_t J = idx.shape[2]
    cdef Py_ssize_t k, c, j, sweep
    cdef double cont, q, best, resid, diff
    new_arr = np.empty(C, dtype=np.float64)
    cdef double[::1] new = new_arr
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        resid = 0.0
        for c in range(C):
            if absorbing[c]:
                new[c] = 0.0
            else:
                best = 1e300
                for k in range(K):
                    cont = 0.0
                    for j in range(J):
                        cont += wts[k, c, j] * values[idx[k, c, j]]
                    q = costs[k, c] + cont
                    if q < best:
                        best = q
                new[c] = best
            diff = fabs(new[c] - values[c])
            if diff > resid:
                resid = diff
        values[:] = new
        if resid < tol:
            return sweep, resid
    return max_sweeps, resid


def soft_vi(double[::1] values, double[:, ::1] costs, cnp.uint8_t[::1] absorbing,
            long[:, :, ::1] idx, double[:, :, ::1] wts, double tol, long max_sweeps):
    cdef Py_ssize_t K = costs.shape[0]
    cdef Py_ssize_t C = costs.shape[1]
    cdef Py_ssize_t J = idx.shape[2]
    cdef Py_ssize_t k, c, j, sweep
    cdef double cont, m, acc, resid, diff
    q_arr = np.empty(K, dtype=np.float64)
    new_arr = np.empty(C, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] new = new_arr
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        resid = 0.0
        for c in range(C):
            if absorbing[c]:
                new[c] = 0.0
            else:
                m = 1e300
                for k in range(K):
                    cont = 0.0
                    for j in range(J):
                        cont += wts[k, c, j] * values[idx[k, c, j]]
                    q[k] = costs[k, c] + cont
                    if q[k] < m:
                        m = q[k]
                acc = 0.0
                for k in range(K):
                    acc += exp(m - q[k])
                new[c] = m - log(acc)
            diff = fabs(new[c] - values[c])
            if diff > resid:
                resid = diff
        values[:] = new
        if resid < tol:
            return sweep, resid
    return max_sweeps, resid
