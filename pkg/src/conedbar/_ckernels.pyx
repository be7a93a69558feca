# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the singularity-subtracted Cauchy quadrature."""

import numpy as np


def cauchy_sum(const double complex[:] nodes, const double[:] weights,
               const double complex[:, :] values, const double complex[:] targets,
               const double complex[:, :] target_values, double tol):
    """out[i, k] = sum_j w_j (v[j, k] - tv[i, k]) / (a_i - t_j); pairs closer than tol skipped."""
    cdef Py_ssize_t n = nodes.shape[0]
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t nk = values.shape[1]
    cdef double[:] xr = np.ascontiguousarray(np.real(nodes))
    cdef double[:] xi = np.ascontiguousarray(np.imag(nodes))
    cdef double[:, :] vr = np.ascontiguousarray(np.real(values))
    cdef double[:, :] vi = np.ascontiguousarray(np.imag(values))
    out = np.zeros((m, nk), dtype=np.complex128)
    cdef double complex[:, :] res = out
    cdef double[:] accr = np.zeros(nk)
    cdef double[:] acci = np.zeros(nk)
    cdef Py_ssize_t i, j, k
    cdef double ar, ai, dr, di, den, kr, ki, sr, si, tol2 = tol * tol
    for i in range(m):
        ar = targets[i].real
        ai = targets[i].imag
        sr = 0.0
        si = 0.0
        for k in range(nk):
            accr[k] = 0.0
            acci[k] = 0.0
        for j in range(n):
            dr = ar - xr[j]
            di = ai - xi[j]
            den = dr * dr + di * di
            if den <= tol2:
                continue
            den = weights[j] / den
            kr = dr * den
            ki = -di * den
            sr += kr
            si += ki
            for k in range(nk):
                accr[k] += kr * vr[j, k] - ki * vi[j, k]
                acci[k] += kr * vi[j, k] + ki * vr[j, k]
        for k in range(nk):
            res[i, k] = (accr[k] + 1j * acci[k]) - (sr + 1j * si) * target_values[i, k]
    return out
