"""Stationary density of the TAR chain and the limit Poisson intensity.

The stationary density solves the fixed-point equation

    f(y) = integral f(x) [phi(y - rho1 x) 1{|x| < theta} + phi(y - rho2 x) 1{|x| >= theta}] dx

with ``phi`` the N(0, sigma^2) density (``x`` instead of ``|x|`` for the
one-sided model). It is discretised with the trapezoid rule on a uniform
grid that has nodes exactly at the regime cut, and iterated to convergence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from .errors import ConfigError, DomainError, NumericFailure
from .model import Sidedness, TarParams, Trajectory

TAIL_MASS_MAX = 1e-10
NORM_TOL = 1e-8
EVEN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensitySolution:
    grid: np.ndarray
    values: np.ndarray
    lam: float
    residual: float
    iterations: int
    params: TarParams
    grid_spec: dict = field(default_factory=dict)

    @property
    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any((x < self.grid[0]) | (x > self.grid[-1])):
            raise DomainError(f"x outside the solution grid [{self.grid[0]}, {self.grid[-1]}]")
        return np.interp(x, self.grid, self.values)

    def metadata(self) -> dict:
        return {
            "lambda": self.lam,
            "f_theta": self.lam / (1.0 if self.params.one_sided else 2.0),
            "residual": self.residual,
            "iterations": self.iterations,
            "grid": dict(self.grid_spec),
            "params": self.params.to_dict(),
        }


def _tail_coefficient(params: TarParams) -> float:
    if params.one_sided:
        return max(abs(params.rho1), abs(params.rho2))
    return abs(params.rho2)


def _min_half_width(params: TarParams) -> float:
    """Smallest half-width passing the tail-mass and inner-reach checks."""
    r = _tail_coefficient(params)
    sd0 = params.sigma / math.sqrt(1.0 - r * r)
    reach = abs(params.rho1) * params.theta + 6.0 * params.sigma
    return max(float(norm.isf(TAIL_MASS_MAX / 2.0)) * sd0, reach)


def default_x_max(params: TarParams) -> float:
    """``6 sd + theta`` with ``sd`` the outer-regime stationary scale, widened if
    that leaves more than ``TAIL_MASS_MAX`` of stationary mass off the grid."""
    r = _tail_coefficient(params)
    base = 6.0 * params.sigma / math.sqrt(1.0 - r * r) + params.theta
    return max(base, _min_half_width(params))


def make_grid(params: TarParams, x_max: float, points: int):
    """Symmetric uniform grid, at least ``x_max`` wide, with nodes at +-theta.

    Returns ``(grid, h)``. ``x_max`` is rounded up so that ``theta`` is an
    integer number of steps from zero.
    """
    if points < 401 or points % 2 == 0:
        raise ConfigError(f"points must be odd and >= 401, got {points}")
    half = (points - 1) // 2
    steps_to_theta = math.floor(half * abs(params.theta) / x_max)
    if steps_to_theta < 1:
        raise ConfigError(
            f"grid too coarse to resolve theta={params.theta} with x_max={x_max}; raise points"
        )
    h = abs(params.theta) / steps_to_theta
    grid = h * np.arange(-half, half + 1, dtype=np.float64)
    return grid, h


def _kernel_matrix(params: TarParams, grid: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid-weighted transition kernel ``K[i, k] ~ w_k p(x_k -> y_i)``."""
    x = grid
    z = x if params.one_sided else np.abs(x)
    inner = norm.pdf(x[:, None] - params.rho1 * x[None, :], scale=params.sigma)
    outer = norm.pdf(x[:, None] - params.rho2 * x[None, :], scale=params.sigma)
    K = np.where((z < params.theta)[None, :], inner, outer)
    # the indicator jumps at the cut nodes: use the mean of the one-sided limits
    cut = np.isclose(z, params.theta, rtol=0, atol=1e-12 * h)
    K[:, cut] = 0.5 * (inner[:, cut] + outer[:, cut])
    w = np.full(x.size, h)
    w[0] = w[-1] = 0.5 * h
    return K * w[None, :]


def _check_state(f, grid, params, it):
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise NumericFailure(f"density lost nonnegativity/finiteness at iteration {it}")
    mass = np.trapezoid(f, grid)
    if abs(mass - 1.0) > NORM_TOL:
        raise NumericFailure(f"density mass {mass} off by more than {NORM_TOL} at iteration {it}")
    if not params.one_sided:
        asym = np.max(np.abs(f - f[::-1]))
        if asym > EVEN_TOL:
            raise NumericFailure(f"two-sided density lost evenness ({asym:.3g}) at iteration {it}")


def solve_density(
    params: TarParams,
    x_max: float | None = None,
    points: int = 2001,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> DensitySolution:
    """Fixed-point iteration ``f <- K f`` with unit-mass renormalisation.

    Starts from the Gaussian N(0, sigma^2 / (1 - rho_tail^2)) where
    ``rho_tail`` is the coefficient governing the tails (``rho2``; the larger
    of the two in absolute value for the one-sided model).

    Raises
    ------
    ConfigError
        If the grid leaves more than ``1e-10`` stationary tail mass uncovered.
    NumericFailure
        If the iteration has not converged after ``max_iter`` steps.
    """
    x_max = default_x_max(params) if x_max is None else float(x_max)
    if not x_max > 0:
        raise ConfigError(f"x_max must be positive, got {x_max}")
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    grid, h = make_grid(params, x_max, int(points))

    r = _tail_coefficient(params)
    sd0 = params.sigma / math.sqrt(1.0 - r * r)
    x_edge = grid[-1]
    tail = 2.0 * ndtr(-x_edge / sd0)
    reach = abs(params.rho1) * params.theta + 6.0 * params.sigma
    if tail > TAIL_MASS_MAX or x_edge < reach:
        raise ConfigError(
            f"grid half-width {x_edge:.4g} too small: stationary tail mass {tail:.3g} "
            f"(need < {TAIL_MASS_MAX:g}) or inner-regime reach {reach:.4g}"
        )

    K = _kernel_matrix(params, grid, h)
    f = norm.pdf(grid, scale=sd0)
    f /= np.trapezoid(f, grid)
    _check_state(f, grid, params, 0)

    change = math.inf
    for it in range(1, int(max_iter) + 1):
        g = K @ f
        g /= np.trapezoid(g, grid)
        _check_state(g, grid, params, it)
        change = float(np.max(np.abs(g - f)))
        f = g
        if change < tol:
            break
    else:
        raise NumericFailure(
            f"density iteration did not converge in {max_iter} steps (last change {change:.3g})",
            residual=change,
        )

    check = K @ f
    check /= np.trapezoid(check, grid)
    residual = float(np.max(np.abs(check - f)))
    lam = (1.0 if params.one_sided else 2.0) * float(np.interp(params.theta, grid, f))
    spec = {"x_max": float(x_edge), "points": int(grid.size), "h": h, "tol": tol, "max_iter": int(max_iter)}
    return DensitySolution(grid, f, lam, residual, it, params, spec)


def intensity(sol: DensitySolution, sidedness: Sidedness | str | None = None) -> float:
    """Limit Poisson intensity: ``2 f(theta, theta)`` two-sided, ``f(theta, theta)`` one-sided."""
    side = sol.params.sidedness if sidedness is None else Sidedness(sidedness)
    theta = sol.params.theta
    if not sol.grid[0] <= theta <= sol.grid[-1]:
        raise DomainError(f"theta={theta} outside the solution grid")
    f_theta = float(np.interp(theta, sol.grid, sol.values))
    return 2.0 * f_theta if side is Sidedness.TWO_SIDED else f_theta


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return 1.06 * float(np.std(x, ddof=1)) * x.size ** (-0.2)


def kde(data, grid, bandwidth: float | str = "auto", chunk: int = 256) -> np.ndarray:
    """Gaussian kernel density estimate of ``data`` evaluated on ``grid``.

    ``bandwidth="auto"`` uses Silverman's rule ``1.06 sd n^(-1/5)``.
    """
    x = data.values if isinstance(data, Trajectory) else np.asarray(data, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if bandwidth == "auto":
        bw = silverman_bandwidth(x)
    else:
        bw = float(bandwidth)
    if not bw > 0:
        raise ConfigError(f"bandwidth must be > 0, got {bw}")
    out = np.empty(grid.size)
    for start in range(0, grid.size, chunk):
        g = grid[start:start + chunk]
        out[start:start + chunk] = norm.pdf((g[:, None] - x[None, :]) / bw).sum(axis=1)
    return out / (x.size * bw)
