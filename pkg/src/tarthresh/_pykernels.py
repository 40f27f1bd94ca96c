"""Pure-Python versions of the compiled kernels.

Loops are written in the same order as ``_kernels.pyx`` so both backends
round identically.
"""
import math

import numpy as np


def tar_path(noise, x0, rho1, rho2, theta, one_sided):
    eps = np.asarray(noise, dtype=np.float64).tolist()
    out = [0.0] * (len(eps) + 1)
    x = float(x0)
    out[0] = x
    for j, e in enumerate(eps):
        z = x if one_sided else abs(x)
        if z < theta:
            x = rho1 * x + e
        else:
            x = rho2 * x + e
        out[j + 1] = x
    return np.array(out, dtype=np.float64)


def drop_walk(inc, level, peak, guard):
    steps = np.asarray(inc, dtype=np.float64).tolist()
    out = []
    for k, d in enumerate(steps):
        level = level + d
        out.append(level)
        if level > peak:
            peak = level
        if level < peak - guard:
            return k, np.array(out, dtype=np.float64), level, peak
    return -1, np.array(out, dtype=np.float64), level, peak


def plateau_scan(vp, sp, vm, sm, tol):
    vp = np.asarray(vp, dtype=np.float64).tolist()
    sp = np.asarray(sp, dtype=np.float64).tolist()
    vm = np.asarray(vm, dtype=np.float64).tolist()
    sm = np.asarray(sm, dtype=np.float64).tolist()
    kp, km = len(vp), len(vm)

    smax = 0.0
    for s in sp[:-1]:
        if s > smax:
            smax = s
    for s in sm[:-1]:
        if s > smax:
            smax = s
    thr = smax - tol

    # integrals: central plateau, then each side from the origin outward
    w = math.exp(0.0 - smax)
    j_minus = 0.0 - w * vm[0] * vm[0] * 0.5
    i_minus = 0.0 + w * vm[0]
    j_plus = 0.0 + w * vp[0] * vp[0] * 0.5
    i_plus = 0.0 + w * vp[0]
    for k in range(kp - 1):
        w = math.exp(sp[k] - smax)
        j_plus = j_plus + w * (vp[k + 1] * vp[k + 1] - vp[k] * vp[k]) * 0.5
        i_plus = i_plus + w * (vp[k + 1] - vp[k])
    for k in range(km - 1):
        w = math.exp(sm[k] - smax)
        j_minus = j_minus - w * (vm[k + 1] * vm[k + 1] - vm[k] * vm[k]) * 0.5
        i_minus = i_minus + w * (vm[k + 1] - vm[k])

    # (lo, hi, log Z) left to right; the central plateau has log Z = 0
    segments = [(-vm[k + 1], -vm[k], sm[k]) for k in range(km - 2, -1, -1)]
    segments.append((-vm[0], vp[0], 0.0))
    segments.extend((vp[k], vp[k + 1], sp[k]) for k in range(kp - 1))

    runs = 0
    in_run = False
    first_lo = first_hi = 0.0
    for lo, hi, val in segments:
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
    return first_lo, first_hi, runs > 1, smax, j_plus, j_minus, i_plus, i_minus
