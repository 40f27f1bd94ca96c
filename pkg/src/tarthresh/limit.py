"""Limit likelihood-ratio process and the limit laws of the estimators.

On each side of the origin the log likelihood ratio ``log Z`` is a compound
Poisson walk: events arrive at rate ``lam`` and each event adds

    -rho^2 theta^2 / (2 sigma^2) - rho theta eps / sigma^2,   eps ~ N(0, sigma^2).

Paths are generated on the unit-rate clock ``v`` and mapped to ``u = v / lam``,
so estimates for different intensities computed from one stream differ by
exactly the factor ``1 / lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, NumericFailure

DEFAULT_GUARD = 40.0
MAX_EVENTS = 1_000_000
TIE_TOL = 1e-9
_CHUNK = 64


def _jump_constants(rho: float, theta: float, sigma: float):
    drift = rho * rho * theta * theta / (2.0 * sigma * sigma)
    slope = rho * theta / (sigma * sigma)
    return drift, slope


@dataclass(frozen=True, eq=False)
class LimitPath:
    """Two-sided event stream of the limit likelihood ratio.

    ``plus_v`` / ``minus_v`` are event times on the unit-rate clock (distance
    from the origin), ``*_marks`` the Gaussian marks and ``*_logz`` the value
    of ``log Z`` just after each event. ``log Z = 0`` between the first event
    on either side.
    """

    lam: float
    rho: float
    theta: float
    sigma: float
    plus_v: np.ndarray
    plus_marks: np.ndarray
    plus_logz: np.ndarray
    minus_v: np.ndarray
    minus_marks: np.ndarray
    minus_logz: np.ndarray
    guard: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_events(cls, lam, rho, theta, sigma, plus_v, plus_marks, minus_v, minus_marks,
                    guard=None) -> "LimitPath":
        """Build a path from explicit events (unit-rate times and marks)."""
        if not lam > 0:
            raise ConfigError(f"intensity must be > 0, got {lam}")
        if rho == 0:
            raise ConfigError("rho must be nonzero")
        drift, slope = _jump_constants(rho, theta, sigma)
        sides = []
        for v, m in ((plus_v, plus_marks), (minus_v, minus_marks)):
            v = np.asarray(v, dtype=np.float64)
            m = np.asarray(m, dtype=np.float64)
            if v.size < 1 or v.shape != m.shape:
                raise ConfigError("each side needs at least one event and one mark per event")
            if v[0] <= 0 or np.any(np.diff(v) <= 0):
                raise ConfigError("event times must be positive and strictly increasing")
            inc = -drift - slope * m
            logz = np.cumsum(np.concatenate(([0.0], inc)))[1:]
            sides.append((v, m, logz))
        (pv, pm, pl), (mv, mm, ml) = sides
        return cls(float(lam), float(rho), float(theta), float(sigma), pv, pm, pl, mv, mm, ml, guard)

    @property
    def gamma(self) -> float:
        return self.rho * self.theta / self.sigma

    @property
    def plus_times(self) -> np.ndarray:
        return self.plus_v / self.lam

    @property
    def minus_times(self) -> np.ndarray:
        """Distances of the negative-side events from the origin."""
        return self.minus_v / self.lam

    def increments(self, side: str) -> np.ndarray:
        drift, slope = _jump_constants(self.rho, self.theta, self.sigma)
        marks = self.plus_marks if side == "plus" else self.minus_marks
        return -drift - slope * marks

    def logz_at(self, u):
        """``log Z(u)`` evaluated by direct event counting."""
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        out = np.zeros(u.shape)
        pos = u > 0
        up, um = self.plus_times, self.minus_times
        kp = np.searchsorted(up, u[pos], side="right")
        km = np.searchsorted(um, -u[~pos], side="right")
        cp = np.concatenate(([0.0], self.plus_logz))
        cm = np.concatenate(([0.0], self.minus_logz))
        out[pos] = cp[kp]
        out[~pos] = cm[km]
        return out

    def reflected(self) -> "LimitPath":
        """Mirror image ``u -> -u``: swap sides, negate marks and ``rho``.

        Each jump of ``log Z`` is unchanged, so ``Z_reflected(u) == Z(-u)`` exactly.
        """
        return LimitPath(
            self.lam, -self.rho, self.theta, self.sigma,
            self.minus_v, -self.minus_marks, self.minus_logz,
            self.plus_v, -self.plus_marks, self.plus_logz,
            self.guard, dict(self.diagnostics),
        )

    def support(self) -> tuple[float, float]:
        """Interval covered by the closed segments (ends at the last event per side)."""
        return (-self.minus_times[-1], self.plus_times[-1])

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "rho": self.rho,
            "theta": self.theta,
            "sigma": self.sigma,
            "gamma": self.gamma,
            "guard": self.guard,
            "plus": {
                "times": self.plus_times.tolist(),
                "marks": self.plus_marks.tolist(),
                "logz": self.plus_logz.tolist(),
            },
            "minus": {
                "times": (-self.minus_times).tolist(),
                "marks": self.minus_marks.tolist(),
                "logz": self.minus_logz.tolist(),
            },
            "diagnostics": dict(self.diagnostics),
        }


def _walk_side(rng, drift, slope, sigma, guard, max_events):
    times, marks, logz = [], [], []
    clock = level = peak = 0.0
    count = 0
    while True:
        gaps = rng.standard_exponential(_CHUNK)
        eps = sigma * rng.standard_normal(_CHUNK)
        inc = -drift - slope * eps
        stop, levels, level, peak = kernels.drop_walk(inc, level, peak, guard)
        used = levels.size
        t = np.cumsum(np.concatenate(([clock], gaps[:used])))[1:]
        clock = t[-1]
        times.append(t)
        marks.append(eps[:used])
        logz.append(levels)
        count += used
        if stop >= 0:
            break
        if count >= max_events:
            raise NumericFailure(
                f"limit path did not drop {guard} below its maximum within {max_events} events",
                events=count,
            )
    return np.concatenate(times), np.concatenate(marks), np.concatenate(logz), peak


def sample_limit_path(lam: float, rho: float, theta: float, sigma: float = 1.0,
                      guard: float = DEFAULT_GUARD, seed=None,
                      max_events: int = MAX_EVENTS) -> LimitPath:
    """Simulate the two-sided limit process until it is negligible on both sides.

    Each side is extended until ``log Z`` has fallen ``guard`` below its
    running maximum (the maximum includes ``log Z(0) = 0``). The plus side is
    drawn first, then the minus side, from one generator seeded by ``seed``.
    """
    if not lam > 0:
        raise ConfigError(f"intensity must be > 0, got {lam}")
    if rho == 0:
        raise ConfigError("rho must be nonzero (degenerate model)")
    if not guard > 0:
        raise ConfigError(f"guard must be > 0, got {guard}")
    if not sigma > 0:
        raise ConfigError(f"sigma must be > 0, got {sigma}")
    rng = np.random.default_rng(seed)
    drift, slope = _jump_constants(rho, theta, sigma)
    pv, pm, pl, ppeak = _walk_side(rng, drift, slope, sigma, guard, max_events)
    mv, mm, ml, mpeak = _walk_side(rng, drift, slope, sigma, guard, max_events)
    diag = {
        "plus_events": int(pv.size),
        "minus_events": int(mv.size),
        "plus_max_logz": float(ppeak),
        "minus_max_logz": float(mpeak),
        "guard": float(guard),
    }
    return LimitPath(float(lam), float(rho), float(theta), float(sigma),
                     pv, pm, pl, mv, mm, ml, float(guard), diag)


@dataclass(frozen=True)
class LimitEstimate:
    """Limit estimators for one path, in ``u`` units.

    ``j_*`` and ``i_*`` are the one-sided integrals of ``u Z(u)`` and ``Z(u)``
    scaled by ``exp(-log_scale)`` (the path maximum) to avoid overflow.
    """

    u_hat: float
    u_m: float
    u_M: float
    u_tilde: float
    j_plus: float
    j_minus: float
    i_plus: float
    i_minus: float
    log_scale: float
    tie: bool
    weight: float = 0.5


def analyze_path(path: LimitPath, weight: float = 0.5, tol: float = TIE_TOL) -> LimitEstimate:
    """MLE interval and Bayes integrals of one path in a single scan."""
    if not 0.0 <= weight <= 1.0:
        raise ConfigError(f"weight must be in [0, 1], got {weight}")
    lo, hi, tie, smax, jp, jm, ip, im = kernels.plateau_scan(
        path.plus_v, path.plus_logz, path.minus_v, path.minus_logz, tol
    )
    den = ip + im
    if not den > 0:
        raise NumericFailure("Bayes denominator underflowed")
    lam = path.lam
    return LimitEstimate(
        u_hat=(weight * lo + (1.0 - weight) * hi) / lam,
        u_m=lo / lam,
        u_M=hi / lam,
        u_tilde=((jm + jp) / den) / lam,
        j_plus=jp / (lam * lam),
        j_minus=jm / (lam * lam),
        i_plus=ip / lam,
        i_minus=im / lam,
        log_scale=smax,
        tie=bool(tie),
        weight=weight,
    )


def mle_limit(path: LimitPath, weight: float = 0.5) -> LimitEstimate:
    """Weighted point ``weight * u_m + (1 - weight) * u_M`` of the maximising interval.

    ``weight=0.5`` is the centre of gravity. When maximal plateaus are not
    adjacent the leftmost is used and ``tie`` is set.
    """
    return analyze_path(path, weight)


def bayes_limit(path: LimitPath) -> LimitEstimate:
    """Posterior-mean limit ``(J- + J+) / (I- + I+)`` from the closed-form segment sums.

    The segment beyond the last generated event on each side is not included;
    by construction its weight is below ``exp(-guard)`` relative to the maximum.
    """
    return analyze_path(path)


def char_fn_analytic(v, u: float, rho: float, theta: float, sigma: float, f_theta: float,
                     factor: float = 2.0):
    """Characteristic function of the compound Poisson process ``Y+(u)``.

    ``Y+(u) = sum_{l <= N(u)} (rho^2 theta^2 + 2 rho theta eps_l)`` with ``N`` of
    intensity ``factor * f_theta`` (2 for the two-sided model, 1 for one-sided).
    """
    if u < 0:
        raise ConfigError(f"u must be >= 0, got {u}")
    v = np.asarray(v, dtype=np.float64)
    a = rho * rho * theta * theta
    expo = 1j * v * a - 2.0 * v * v * a * sigma * sigma
    out = np.exp(u * (np.exp(expo) - 1.0) * factor * f_theta)
    return out if out.ndim else complex(out)


def sample_compound_poisson(u: float, lam: float, rho: float, theta: float, sigma: float,
                            size: int, seed=None) -> np.ndarray:
    """Draws of ``Y+(u)`` built from exponential inter-arrival times and Gaussian marks."""
    if u < 0 or not lam > 0:
        raise ConfigError("need u >= 0 and lam > 0")
    rng = np.random.default_rng(seed)
    horizon = lam * u
    width = max(8, int(math.ceil(horizon + 10.0 * math.sqrt(horizon + 1.0) + 10)))
    arrivals = np.cumsum(rng.standard_exponential((size, width)), axis=1)
    # extend rows whose last arrival has not passed the horizon
    while np.any(arrivals[:, -1] <= horizon):
        more = np.cumsum(rng.standard_exponential((size, width)), axis=1) + arrivals[:, -1:]
        arrivals = np.concatenate((arrivals, more), axis=1)
    counted = arrivals <= horizon
    eps = sigma * rng.standard_normal(arrivals.shape)
    a = rho * rho * theta * theta
    return np.where(counted, a + 2.0 * rho * theta * eps, 0.0).sum(axis=1)
