# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tabulation kernels; mirrors kernels._ref exactly."""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


def n_scalar(int k):
    return (k + 1) * (k + 2) // 2


def legendre_tab(int n, s):
    s_arr = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] sv = s_arr
    cdef Py_ssize_t npts = sv.shape[0]
    out = np.empty((n + 1, npts))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p
    cdef int m
    for p in range(npts):
        o[0, p] = 1.0
        if n >= 1:
            o[1, p] = sv[p]
        for m in range(2, n + 1):
            o[m, p] = ((2 * m - 1) * sv[p] * o[m - 1, p] - (m - 1) * o[m - 2, p]) / m
    return out


def dubiner_tab(int k, pts, bint want_grad=False):
    pts_arr = np.ascontiguousarray(pts, dtype=np.float64)
    cdef double[:, ::1] xy = pts_arr
    cdef Py_ssize_t npts = xy.shape[0]
    cdef int nb = (k + 1) * (k + 2) // 2
    vals = np.empty((nb, npts))
    gx = np.empty((nb, npts)) if want_grad else None
    gy = np.empty((nb, npts)) if want_grad else None
    cdef double[:, ::1] V = vals
    cdef double[:, ::1] GX = vals if not want_grad else gx
    cdef double[:, ::1] GY = vals if not want_grad else gy

    # per-point scratch recurrences
    P = np.empty(k + 1)
    Pu = np.zeros(k + 1)
    Pt = np.zeros(k + 1)
    J = np.empty(k + 1)
    Jz = np.zeros(k + 1)
    cdef double[::1] Pv = P, Puv = Pu, Ptv = Pt, Jv = J, Jzv = Jz

    cdef Py_ssize_t p
    cdef int q, r, n, d, idx, a
    cdef double x, y, u, t, z, t2, c0, c1z, c1, c2, ax, ay
    for p in range(npts):
        x = xy[p, 0]
        y = xy[p, 1]
        u = 2.0 * x + y - 1.0
        t = 1.0 - y
        z = 2.0 * y - 1.0
        t2 = t * t
        Pv[0] = 1.0
        Puv[0] = 0.0
        Ptv[0] = 0.0
        if k >= 1:
            Pv[1] = u
            Puv[1] = 1.0
            Ptv[1] = 0.0
        for n in range(2, k + 1):
            Pv[n] = ((2 * n - 1) * u * Pv[n - 1] - (n - 1) * t2 * Pv[n - 2]) / n
            if want_grad:
                Puv[n] = ((2 * n - 1) * (Pv[n - 1] + u * Puv[n - 1])
                          - (n - 1) * t2 * Puv[n - 2]) / n
                Ptv[n] = ((2 * n - 1) * u * Ptv[n - 1]
                          - (n - 1) * (2 * t * Pv[n - 2] + t2 * Ptv[n - 2])) / n
        for q in range(k + 1):
            a = 2 * q + 1
            Jv[0] = 1.0
            Jzv[0] = 0.0
            if k - q >= 1:
                Jv[1] = ((a + 2) * z + a) / 2.0
                Jzv[1] = (a + 2) / 2.0
            for n in range(2, k - q + 1):
                c0 = 2 * n * (n + a) * (2 * n + a - 2)
                c1z = (2 * n + a - 1) * (2 * n + a) * (2 * n + a - 2)
                c1 = (2 * n + a - 1) * a * a
                c2 = 2 * (n + a - 1) * (n - 1) * (2 * n + a)
                Jv[n] = ((c1z * z + c1) * Jv[n - 1] - c2 * Jv[n - 2]) / c0
                if want_grad:
                    Jzv[n] = (c1z * Jv[n - 1] + (c1z * z + c1) * Jzv[n - 1]
                              - c2 * Jzv[n - 2]) / c0
            for r in range(k - q + 1):
                d = q + r
                idx = d * (d + 1) // 2 + q
                V[idx, p] = Pv[q] * Jv[r]
                if want_grad:
                    ax = 2.0 * Puv[q]
                    ay = Puv[q] - Ptv[q]
                    GX[idx, p] = ax * Jv[r]
                    GY[idx, p] = ay * Jv[r] + Pv[q] * (2.0 * Jzv[r])
    if want_grad:
        return vals, gx, gy
    return vals
