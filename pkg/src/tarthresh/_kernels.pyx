# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Each function mirrors one in ``_pykernels`` and must
return bit-identical results for the same inputs."""

import numpy as np

from libc.math cimport exp, fabs


def tar_path(const double[::1] noise, double x0, double rho1, double rho2,
             double theta, bint one_sided):
    cdef Py_ssize_t n = noise.shape[0]
    cdef Py_ssize_t j
    cdef double x = x0
    cdef double z
    out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] o = out
    o[0] = x
    for j in range(n):
        z = x if one_sided else fabs(x)
        if z < theta:
            x = rho1 * x + noise[j]
        else:
            x = rho2 * x + noise[j]
        o[j + 1] = x
    return out


def drop_walk(const double[::1] inc, double level, double peak, double guard):
    cdef Py_ssize_t n = inc.shape[0]
    cdef Py_ssize_t k
    cdef Py_ssize_t stop = -1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for k in range(n):
        level = level + inc[k]
        o[k] = level
        if level > peak:
            peak = level
        if level < peak - guard:
            stop = k
            break
    if stop >= 0:
        return stop, out[:stop + 1], level, peak
    return -1, out, level, peak


def plateau_scan(const double[::1] vp, const double[::1] sp,
                 const double[::1] vm, const double[::1] sm, double tol):
    cdef Py_ssize_t kp = vp.shape[0]
    cdef Py_ssize_t km = vm.shape[0]
    cdef Py_ssize_t k
    cdef double smax = 0.0
    cdef double thr, w, lo, hi, val
    cdef double first_lo = 0.0
    cdef double first_hi = 0.0
    cdef int runs = 0
    cdef bint in_run = False
    cdef double j_plus = 0.0, j_minus = 0.0, i_plus = 0.0, i_minus = 0.0

    for k in range(kp - 1):
        if sp[k] > smax:
            smax = sp[k]
    for k in range(km - 1):
        if sm[k] > smax:
            smax = sm[k]
    thr = smax - tol

    # integrals: central plateau, then each side from the origin outward
    w = exp(0.0 - smax)
    j_minus = j_minus - w * vm[0] * vm[0] * 0.5
    i_minus = i_minus + w * vm[0]
    j_plus = j_plus + w * vp[0] * vp[0] * 0.5
    i_plus = i_plus + w * vp[0]
    for k in range(kp - 1):
        w = exp(sp[k] - smax)
        j_plus = j_plus + w * (vp[k + 1] * vp[k + 1] - vp[k] * vp[k]) * 0.5
        i_plus = i_plus + w * (vp[k + 1] - vp[k])
    for k in range(km - 1):
        w = exp(sm[k] - smax)
        j_minus = j_minus - w * (vm[k + 1] * vm[k + 1] - vm[k] * vm[k]) * 0.5
        i_minus = i_minus + w * (vm[k + 1] - vm[k])

    # maximal plateaus, scanned left to right
    for k in range(km - 1, -1, -1):
        if k == 0:
            lo = -vm[0]
            hi = vp[0]
            val = 0.0
        else:
            lo = -vm[k]
            hi = -vm[k - 1]
            val = sm[k - 1]
        if val >= thr:
            if not in_run:
                runs += 1
                in_run = True
                if runs == 1:
                    first_lo = lo
            if runs == 1:
                first_hi = hi
        else:
            in_run = False
    for k in range(kp - 1):
        if sp[k] >= thr:
            if not in_run:
                runs += 1
                in_run = True
                if runs == 1:
                    first_lo = vp[k]
            if runs == 1:
                first_hi = vp[k + 1]
        else:
            in_run = False

    return first_lo, first_hi, runs > 1, smax, j_plus, j_minus, i_plus, i_minus
