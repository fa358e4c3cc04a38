# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: principal-value quadrature sums and the midpoint sweep.

Mirrors reference.py; the test suite checks both backends agree.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()


def pv_subtracted(yev, znodes, fvals, fpole, flimit, double h, double guard):
    cdef const double[::1] y = np.ascontiguousarray(yev, dtype=np.float64)
    cdef const double[::1] z = np.ascontiguousarray(znodes, dtype=np.float64)
    cdef const double[::1] f = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef const double[::1] fp = np.ascontiguousarray(fpole, dtype=np.float64)
    cdef const double[::1] fl = np.ascontiguousarray(flimit, dtype=np.float64)
    cdef Py_ssize_t p = y.shape[0], q = z.shape[0], i, k
    out_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double pi = np.pi
    cdef double acc, den, yi, fpi, fli
    for i in range(p):
        yi = y[i]
        fpi = fp[i]
        fli = fl[i]
        acc = 0.0
        for k in range(q):
            if fabs(z[k] - yi) < guard:
                acc += fli
            else:
                den = 2.0 * sin((z[k] + yi) / 2.0) * sin((z[k] - yi) / 2.0)
                acc += (f[k] - fpi) / den
        out[i] = (h / pi) * acc
    return out_arr


def pv_plain(yev, znodes, svals, double h):
    cdef const double[::1] y = np.ascontiguousarray(yev, dtype=np.float64)
    cdef const double[::1] z = np.ascontiguousarray(znodes, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(svals, dtype=np.float64)
    cdef Py_ssize_t p = y.shape[0], q = z.shape[0], i, k
    out_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double pi = np.pi
    cdef double acc, yi
    for i in range(p):
        yi = y[i]
        acc = 0.0
        for k in range(q):
            acc += s[k] / (2.0 * sin((z[k] + yi) / 2.0) * sin((z[k] - yi) / 2.0))
        out[i] = (h / pi) * acc
    return out_arr


def midpoint_sweep(a, z, sinv, dvec, loads, double dt, Py_ssize_t nsteps, int store):
    cdef double[::1] av = np.array(a, dtype=np.float64, copy=True)
    cdef double[::1] zv = np.array(z, dtype=np.float64, copy=True)
    cdef const double[:, ::1] s = np.ascontiguousarray(sinv, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(dvec, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], i, j, k
    cdef bint has_loads = loads is not None
    cdef const double[:, ::1] lds
    if has_loads:
        lds = np.ascontiguousarray(loads, dtype=np.float64)
    rhs_arr = np.empty(n, dtype=np.float64)
    delta_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] rhs = rhs_arr
    cdef double[::1] delta = delta_arr
    out_arr = None
    cdef double[:, :, ::1] full
    cdef double[:, ::1] mids
    if store == 1:
        out_arr = np.empty((nsteps + 1, 2, n), dtype=np.float64)
        full = out_arr
        for i in range(n):
            full[0, 0, i] = av[i]
            full[0, 1, i] = zv[i]
    elif store == 2:
        out_arr = np.empty((nsteps, n), dtype=np.float64)
        mids = out_arr
    cdef double acc, znew, aold
    for k in range(nsteps):
        for i in range(n):
            acc = -d[i] * (av[i] + 0.5 * dt * zv[i])
            if has_loads:
                acc += lds[k, i]
            rhs[i] = dt * acc
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += s[i, j] * rhs[j]
            delta[i] = acc
        for i in range(n):
            znew = zv[i] + delta[i]
            aold = av[i]
            av[i] = aold + 0.5 * dt * (zv[i] + znew)
            zv[i] = znew
            if store == 1:
                full[k + 1, 0, i] = av[i]
                full[k + 1, 1, i] = zv[i]
            elif store == 2:
                mids[k, i] = 0.5 * (aold + av[i])
    return np.asarray(av), np.asarray(zv), out_arr
