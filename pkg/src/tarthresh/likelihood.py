"""Exact likelihood in the threshold and the finite-sample estimators.

For fixed ``(rho1, rho2, sigma)`` the log-likelihood of a trajectory is a step
function of the threshold: it only changes where the candidate threshold
crosses one of the observed regime variables ``z_j = |X_j|`` (``X_j`` for the
one-sided model), ``j = 0..n-1``. :func:`build_piecewise` tabulates the steps
in ``O(n log n)``; :func:`loglik_at` is the direct evaluation kept as an oracle.
The initial-state density ``f0(X_0)`` is dropped everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, EmptyInputError, NumericFailure
from .model import TarParams, Trajectory

TIE_TOL = 1e-9


def _regime_terms(traj: Trajectory, params: TarParams):
    x = traj.values
    if x.size < 2:
        raise EmptyInputError("trajectory has no transitions (need n >= 1)")
    prev, nxt = x[:-1], x[1:]
    r_inner = (nxt - params.rho1 * prev) ** 2
    r_outer = (nxt - params.rho2 * prev) ** 2
    z = prev if params.one_sided else np.abs(prev)
    return z, r_inner, r_outer


def _log_norm_const(n: int, sigma: float) -> float:
    return -0.5 * n * math.log(2.0 * math.pi * sigma * sigma)


def loglik_at(traj: Trajectory, theta: float, params: TarParams) -> float:
    """Log-likelihood at a single candidate threshold, by direct summation."""
    alpha, beta = params.window
    if not alpha < theta < beta:
        raise DomainError(f"theta={theta} outside the window ({alpha}, {beta})")
    z, r_inner, r_outer = _regime_terms(traj, params)
    rss = np.sum(np.where(z < theta, r_inner, r_outer))
    return _log_norm_const(traj.n, params.sigma) - rss / (2.0 * params.sigma**2)


@dataclass(frozen=True, eq=False)
class PiecewiseLikelihood:
    """Step-function log-likelihood over the window.

    ``loglik[i]`` is the value on the open interval between ``edges[i]`` and
    ``edges[i + 1]`` where ``edges = (alpha, *breakpoints, beta)``.
    """

    breakpoints: np.ndarray
    loglik: np.ndarray
    window: tuple[float, float]
    n: int = 0

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=np.float64).reshape(-1)
        ll = np.array(self.loglik, dtype=np.float64).reshape(-1)
        alpha, beta = (float(v) for v in self.window)
        if not alpha < beta:
            raise ConfigError(f"empty window ({alpha}, {beta})")
        if ll.size != b.size + 1:
            raise ConfigError(
                f"need len(loglik) == len(breakpoints) + 1, got {ll.size} and {b.size}"
            )
        if b.size and (np.any(np.diff(b) <= 0) or b[0] <= alpha or b[-1] >= beta):
            raise ConfigError("breakpoints must be strictly increasing inside the window")
        if not np.all(np.isfinite(ll)):
            raise NumericFailure("non-finite log-likelihood value")
        if self.n and b.size > self.n:
            raise ConfigError(f"{b.size} breakpoints exceed n={self.n}")
        b.setflags(write=False)
        ll.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "loglik", ll)
        object.__setattr__(self, "window", (alpha, beta))

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate(([self.window[0]], self.breakpoints, [self.window[1]]))

    @property
    def midpoints(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def __len__(self):
        return self.loglik.size

    def __call__(self, theta):
        """Evaluate at ``theta`` (breakpoints themselves are assigned the right piece)."""
        theta = np.asarray(theta, dtype=np.float64)
        alpha, beta = self.window
        if np.any((theta <= alpha) | (theta >= beta)):
            raise DomainError(f"theta outside the window ({alpha}, {beta})")
        return self.loglik[np.searchsorted(self.breakpoints, theta, side="right")]


def build_piecewise(traj: Trajectory, params: TarParams) -> PiecewiseLikelihood:
    """Tabulate the log-likelihood as a step function of the threshold.

    Walking the candidate threshold upward across a breakpoint ``b`` moves
    every term with ``z_j == b`` from the outer to the inner regime, changing
    the residual sum of squares by ``sum (X_{j+1} - rho1 X_j)^2 - (X_{j+1} - rho2 X_j)^2``.
    """
    params.require_identifiable()
    z, r_inner, r_outer = _regime_terms(traj, params)
    alpha, beta = params.window

    # lowest piece: z <= alpha is inner for every theta in the window
    below = z <= alpha
    rss0 = np.sum(r_inner[below]) + np.sum(r_outer[~below])

    inside = (z > alpha) & (z < beta)
    zin = z[inside]
    order = np.argsort(zin, kind="stable")
    zs = zin[order]
    delta = (r_inner - r_outer)[inside][order]
    if zs.size:
        breakpoints, starts = np.unique(zs, return_index=True)
        steps = np.add.reduceat(delta, starts)
    else:
        breakpoints = zs
        steps = delta
    rss = rss0 + np.concatenate(([0.0], np.cumsum(steps)))
    loglik = _log_norm_const(traj.n, params.sigma) - rss / (2.0 * params.sigma**2)
    return PiecewiseLikelihood(breakpoints, loglik, params.window, n=traj.n)


@dataclass(frozen=True)
class MleInfo:
    theta_hat: float
    lower: float
    upper: float
    tie: bool


def mle_finite(pl: PiecewiseLikelihood, tol: float = TIE_TOL, full_output: bool = False):
    """Centre of gravity of the likelihood-maximising interval.

    Pieces within ``tol`` of the maximum count as maximal. A contiguous run of
    maximal pieces is merged and its midpoint returned; if maximal pieces are
    split into several runs the first run is used and ``tie`` is set.
    """
    ll = pl.loglik
    edges = pl.edges
    top = ll >= ll.max() - tol
    idx = np.flatnonzero(top)
    # a new run starts wherever consecutive maximal indices are not adjacent
    run_starts = np.flatnonzero(np.diff(idx) > 1)
    first_end = idx[run_starts[0]] if run_starts.size else idx[-1]
    lower, upper = edges[idx[0]], edges[first_end + 1]
    theta_hat = 0.5 * (lower + upper)
    if not full_output:
        return theta_hat
    return theta_hat, MleInfo(theta_hat, lower, upper, bool(run_starts.size))


@dataclass(frozen=True, eq=False)
class Prior:
    """Prior density on the window: uniform, or tabulated and linearly interpolated."""

    kind: str = "uniform"
    grid: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "tabulated"):
            raise ConfigError(f"unknown prior kind {self.kind!r}")
        if self.kind == "tabulated":
            g = np.asarray(self.grid, dtype=np.float64)
            p = np.asarray(self.density, dtype=np.float64)
            if g.ndim != 1 or g.shape != p.shape or g.size < 2:
                raise ConfigError("tabulated prior needs matching 1-d grid and density arrays")
            if np.any(np.diff(g) <= 0):
                raise ConfigError("prior grid must be strictly increasing")
            if not np.all(np.isfinite(p)) or np.any(p <= 0):
                raise ConfigError("prior density must be finite and positive")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "density", p)

    @classmethod
    def uniform(cls) -> "Prior":
        return cls("uniform")

    @classmethod
    def tabulated(cls, grid, density) -> "Prior":
        return cls("tabulated", grid, density)

    def normalized(self, window) -> "Prior":
        """Copy rescaled to integrate to one over ``window``."""
        if self.kind == "uniform":
            return self
        return Prior.tabulated(self.grid, self.density / self._mass(window))

    def _check_covers(self, window):
        alpha, beta = window
        if self.grid[0] > alpha or self.grid[-1] < beta:
            raise ConfigError(
                f"prior grid [{self.grid[0]}, {self.grid[-1]}] does not cover ({alpha}, {beta})"
            )

    def _mass(self, window) -> float:
        # exact integral of the piecewise-linear interpolant
        self._check_covers(window)
        alpha, beta = window
        inner = (self.grid > alpha) & (self.grid < beta)
        t = np.concatenate(([alpha], self.grid[inner], [beta]))
        return float(np.trapezoid(self.pdf(t), t))

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if self.kind == "uniform":
            return np.ones_like(theta)
        return np.interp(theta, self.grid, self.density)


_SIMPSON_PANELS = 8


def _simpson_moments(prior: Prior, lo: np.ndarray, hi: np.ndarray):
    """Per-interval integrals of p(t) and t p(t) by composite Simpson.

    Intervals are first split at the prior's interpolation knots, so each
    Simpson piece sees a linear density and integrates it exactly.
    """
    knots = prior.grid[(prior.grid > lo[0]) & (prior.grid < hi[-1])]
    cuts = np.union1d(np.concatenate((lo, hi[-1:])), knots)
    a, b = cuts[:-1], cuts[1:]
    k = np.arange(2 * (_SIMPSON_PANELS // 2) + 1)
    m = k.size - 1
    wts = np.where(k % 2 == 1, 4.0, 2.0)
    wts[0] = wts[-1] = 1.0
    t = a[:, None] + (b - a)[:, None] * (k / m)[None, :]
    p = prior.pdf(t)
    h = (b - a) / m
    mass = (p * wts).sum(axis=1) * h / 3.0
    first = (t * p * wts).sum(axis=1) * h / 3.0
    # gather the pieces back into the likelihood intervals
    starts = np.searchsorted(cuts, lo)
    return np.add.reduceat(mass, starts), np.add.reduceat(first, starts)


def bayes_finite(pl: PiecewiseLikelihood, prior: Prior | None = None) -> float:
    """Posterior mean of the threshold under ``prior`` (uniform by default)."""
    prior = Prior.uniform() if prior is None else prior
    edges = pl.edges
    lo, hi = edges[:-1], edges[1:]
    w = np.exp(pl.loglik - pl.loglik.max())
    if prior.kind == "uniform":
        mass = hi - lo
        first = 0.5 * (hi * hi - lo * lo)
    else:
        prior._check_covers(pl.window)
        mass, first = _simpson_moments(prior, lo, hi)
    den = np.sum(w * mass)
    if not den > 0 or not math.isfinite(den):
        raise NumericFailure("posterior normalising constant underflowed")
    est = float(np.sum(w * first) / den)
    # guard against rounding past the window edge
    return min(max(est, pl.window[0]), pl.window[1])
