"""Brute-force reference computations shared by the test modules."""
import numpy as np

from tarthresh.likelihood import _log_norm_const

DENSE_CELLS = 10**6


def dense_loglik(traj, params, cells=DENSE_CELLS, chunk=50_000):
    """Log-likelihood at the midpoints of ``cells`` equal cells over the window.

    Evaluated directly as ``sum_j where(z_j < t, r_inner, r_outer)`` without
    sorting, so it shares nothing with the incremental builder.
    """
    alpha, beta = params.window
    h = (beta - alpha) / cells
    t = alpha + (np.arange(cells) + 0.5) * h
    x = traj.values
    z = x[:-1] if params.one_sided else np.abs(x[:-1])
    ri = (x[1:] - params.rho1 * x[:-1]) ** 2
    ro = (x[1:] - params.rho2 * x[:-1]) ** 2
    d = ri - ro
    rss = np.empty(cells)
    for s in range(0, cells, chunk):
        rss[s:s + chunk] = ro.sum() + (z[None, :] < t[s:s + chunk, None]).astype(np.float64) @ d
    return t, _log_norm_const(traj.n, params.sigma) - rss / (2.0 * params.sigma**2), h


def dense_bayes(t, ll, prior_pdf=None):
    """Midpoint-rule posterior mean from :func:`dense_loglik` output."""
    w = np.exp(ll - ll.max())
    if prior_pdf is not None:
        w = w * prior_pdf(t)
    return float(np.sum(w * t) / np.sum(w))


def riemann_limit_bayes(path, step):
    """Posterior mean of the limit process by a midpoint Riemann sum.

    ``log Z`` is sampled at the centre of every cell of width ``step`` inside
    the support of the closed segments.
    """
    lo, hi = path.support()
    k0 = int(np.floor(lo / step))
    k1 = int(np.ceil(hi / step))
    u = (np.arange(k0, k1) + 0.5) * step
    u = u[(u > lo) & (u < hi)]
    logz = path.logz_at(u)
    w = np.exp(logz - logz.max())
    return float(np.sum(w * u) / np.sum(w))


def lattice_path(path, q):
    """Copy of ``path`` with unit-rate event times moved onto multiples of ``q``.

    Gaps are rounded to whole steps (at least one) so times stay strictly
    increasing; marks are kept.
    """
    from tarthresh.limit import LimitPath

    def snap(v):
        gaps = np.diff(np.concatenate(([0.0], v)))
        return np.cumsum(np.maximum(np.round(gaps / q), 1.0)) * q

    return LimitPath.from_events(path.lam, path.rho, path.theta, path.sigma,
                                 snap(path.plus_v), path.plus_marks,
                                 snap(path.minus_v), path.minus_marks, path.guard)
