"""Replicated Monte Carlo experiments.

Replicate ``r`` of a run with master seed ``s`` draws from
``SeedSequence(s, spawn_key=(r,))``, so any replicate can be regenerated on
its own and results do not depend on how replicates are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ks_2samp

from .density import solve_density
from .errors import ConfigError, TarError
from .likelihood import Prior, bayes_finite, build_piecewise, mle_finite
from .limit import DEFAULT_GUARD, analyze_path, sample_limit_path
from .model import TarParams, simulate_tar

TABLE_PROBS = (0.025, 0.05, 0.075, 0.1, 0.9, 0.925, 0.95, 0.975)

# reference critical values and second moments at lambda = 0.5, gamma = 1.6
TABLE1 = {
    "MLE": (-9.66, -6.64, -5.28, -4.46, 4.46, 5.38, 6.87, 9.84),
    "BE": (-8.44, -6.29, -5.07, -4.27, 4.21, 5.09, 6.26, 8.43),
    "Simulated": (-9.70, -6.88, -5.48, -4.64, 4.90, 5.85, 7.55, 10.28),
}
TABLE1_SECOND_MOMENTS = {"MLE": (22.83, 0.68), "BE": (16.79, 0.39)}


def replicate_seed(seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(rep),))


def summarize(sample, probs) -> dict:
    """Quantiles (type 7), mean and second moment with standard errors."""
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    q = np.quantile(x, probs, method="linear") if n else np.full(len(probs), np.nan)
    x2 = x * x
    m2 = float(x2.mean()) if n else math.nan
    # delta method: Var(mean x^2) = (E x^4 - (E x^2)^2) / N
    se2 = math.sqrt(max(float((x2 * x2).mean()) - m2 * m2, 0.0) / n) if n else math.nan
    return {
        "n": int(n),
        "quantiles": [float(v) for v in q],
        "mean": float(x.mean()) if n else math.nan,
        "mean_se": float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan,
        "second_moment": m2,
        "second_moment_se": se2,
    }


@dataclass
class McReport:
    """Samples and summaries of one experiment.

    ``samples`` maps a row label (``"MLE"``, ``"BE"``, ``"Simulated"``, ...)
    to its replicate values ordered by replicate index.
    """

    experiment: str
    probs: tuple
    samples: dict
    reps: int
    seed: int
    config: dict
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = tuple(float(p) for p in self.probs)
        self.samples = {k: np.asarray(v, dtype=np.float64) for k, v in self.samples.items()}
        self.summary = {k: summarize(v, self.probs) for k, v in self.samples.items()}

    def quantiles(self, label) -> np.ndarray:
        return np.asarray(self.summary[label]["quantiles"])

    def second_moment(self, label) -> tuple[float, float]:
        s = self.summary[label]
        return s["second_moment"], s["second_moment_se"]

    def to_dict(self, emit_samples: bool = False) -> dict:
        out = {
            "experiment": self.experiment,
            "reps": self.reps,
            "seed": self.seed,
            "probs": list(self.probs),
            "quantile_method": "linear interpolation of order statistics (type 7)",
            "config": self.config,
            "summary": self.summary,
        }
        if self.extra:
            out["extra"] = self.extra
        if emit_samples:
            out["samples"] = {k: v.tolist() for k, v in self.samples.items()}
        return out

    def table_rows(self, labels=None):
        labels = list(self.samples) if labels is None else labels
        return [(label, self.summary[label]["quantiles"]) for label in labels]


def _run_indexed(task, args, reps, workers, chunk=250):
    """Evaluate ``task(args, rep)`` for every replicate, results in index order."""
    workers = 1 if workers is None else int(workers)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    blocks = [range(i, min(i + chunk, reps)) for i in range(0, reps, chunk)]
    if workers == 1:
        parts = [_run_block(task, args, b) for b in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, [task] * len(blocks), [args] * len(blocks), blocks))
    return [row for part in parts for row in part]


def _run_block(task, args, block):
    return [task(args, rep) for rep in block]


def _limit_task(args, rep):
    lam, rho, theta, sigma, guard, seed, weight = args
    path = sample_limit_path(lam, rho, theta, sigma, guard=guard, seed=replicate_seed(seed, rep))
    est = analyze_path(path, weight)
    return est.u_hat, est.u_tilde, est.u_m, est.u_M, est.tie


def _check_common(reps, probs, min_reps):
    if int(reps) < min_reps:
        raise ConfigError(f"reps must be >= {min_reps}, got {reps}")
    probs = tuple(float(p) for p in probs)
    if not probs or any(not 0.0 < p < 1.0 for p in probs):
        raise ConfigError(f"probabilities must lie in (0, 1), got {probs}")
    return int(reps), probs


def limit_sample(lam, rho, theta, sigma=1.0, reps=20_000, seed=0, guard=DEFAULT_GUARD,
                 weight=0.5, workers=1):
    """Arrays ``(u_hat, u_tilde, u_m, u_M, tie)`` for ``reps`` independent limit paths."""
    if not lam > 0:
        raise ConfigError(f"intensity must be > 0, got {lam}")
    if rho == 0:
        raise ConfigError("rho must be nonzero")
    args = (float(lam), float(rho), float(theta), float(sigma), float(guard), int(seed), float(weight))
    rows = _run_indexed(_limit_task, args, int(reps), workers)
    cols = list(zip(*rows)) if rows else [()] * 5
    return tuple(np.asarray(c) for c in cols)


def run_limit_table(lam, rho, theta, sigma=1.0, reps=20_000, probs=TABLE_PROBS, seed=0,
                    guard=DEFAULT_GUARD, workers=1, min_reps=1000) -> McReport:
    """Critical values of the limit MLE and Bayes laws (rows ``MLE`` and ``BE``)."""
    reps, probs = _check_common(reps, probs, min_reps)
    u_hat, u_tilde, _, _, tie = limit_sample(lam, rho, theta, sigma, reps, seed, guard, workers=workers)
    config = {
        "lambda": float(lam), "rho": float(rho), "theta": float(theta), "sigma": float(sigma),
        "gamma": float(rho * theta / sigma), "guard": float(guard),
    }
    return McReport("limit-table", probs, {"MLE": u_hat, "BE": u_tilde}, reps, int(seed), config,
                    extra={"ties": int(np.sum(tie))})


def _finite_task(args, rep):
    params, n, seed, burn_in, prior = args
    try:
        traj = simulate_tar(params, n, seed=replicate_seed(seed, rep), burn_in=burn_in)
        pl = build_piecewise(traj, params)
        return n * (mle_finite(pl) - params.theta), n * (bayes_finite(pl, prior) - params.theta), None
    except TarError as exc:
        return math.nan, math.nan, f"{type(exc).__name__}: {exc}"


def run_finite_convergence(params: TarParams, n: int = 5000, reps: int = 2000, seed: int = 0,
                           probs=TABLE_PROBS, limit_reps: int = 20_000, lam: float | None = None,
                           prior: Prior | None = None, burn_in: int = 1000,
                           guard=DEFAULT_GUARD, workers=1, min_n: int = 500) -> McReport:
    """Finite-sample ``n (theta_hat - theta)`` and ``n (theta_tilde - theta)`` versus the limit laws.

    The limit sample uses ``lam`` if given, otherwise ``2 f(theta, theta)`` (or
    ``f(theta, theta)`` one-sided) from :func:`solve_density`. The limit
    replicates use the stream ``seed + 1`` so they are independent of the
    finite-sample replicates.
    """
    params.require_identifiable()
    if int(n) < min_n:
        raise ConfigError(f"n must be >= {min_n}, got {n}")
    reps, probs = _check_common(reps, probs, 1)
    prior = Prior.uniform() if prior is None else prior
    lam_source = "given"
    if lam is None:
        lam = solve_density(params).lam
        lam_source = "density solver"

    rows = _run_indexed(_finite_task, (params, int(n), int(seed), int(burn_in), prior), reps, workers)
    mle = np.array([r[0] for r in rows])
    be = np.array([r[1] for r in rows])
    failures = [(i, r[2]) for i, r in enumerate(rows) if r[2] is not None]
    ok = np.isfinite(mle) & np.isfinite(be)

    u_hat, u_tilde, _, _, _ = limit_sample(lam, params.rho, params.theta, params.sigma,
                                           limit_reps, seed + 1, guard, workers=workers)
    ks_mle = ks_2samp(mle[ok], u_hat)
    ks_be = ks_2samp(be[ok], u_tilde)
    config = {
        "params": params.to_dict(), "n": int(n), "burn_in": int(burn_in),
        "prior": prior.kind, "lambda": float(lam), "lambda_source": lam_source,
        "limit_reps": int(limit_reps), "limit_seed": int(seed) + 1, "guard": float(guard),
    }
    extra = {
        "failures": len(failures),
        "failure_messages": [f"rep {i}: {msg}" for i, msg in failures[:10]],
        "ks_mle": float(ks_mle.statistic),
        "ks_mle_pvalue": float(ks_mle.pvalue),
        "ks_be": float(ks_be.statistic),
        "ks_be_pvalue": float(ks_be.pvalue),
    }
    samples = {"Simulated": mle[ok], "SimulatedBE": be[ok], "MLE": u_hat, "BE": u_tilde}
    return McReport("finite-convergence", probs, samples, reps, int(seed), config, extra)


def gamma_weight_sweep(lam, rho, theta, sigma=1.0, weights=None, reps=20_000, seed=0,
                       guard=DEFAULT_GUARD, workers=1) -> dict:
    """Second moment of ``w u_m + (1 - w) u_M`` for each weight, on one common set of paths."""
    weights = np.round(np.linspace(0.0, 1.0, 11), 10) if weights is None else np.asarray(weights, float)
    if np.any((weights < 0) | (weights > 1)):
        raise ConfigError("weights must lie in [0, 1]")
    if not all(np.any(np.isclose(weights, w)) for w in (0.0, 0.5, 1.0)):
        raise ConfigError("weights must include 0, 0.5 and 1")
    _, _, u_m, u_M, _ = limit_sample(lam, rho, theta, sigma, reps, seed, guard, workers=workers)
    moments, ses = [], []
    for w in weights:
        s = summarize(w * u_m + (1.0 - w) * u_M, ())
        moments.append(s["second_moment"])
        ses.append(s["second_moment_se"])
    moments = np.array(moments)
    return {
        "weights": weights.tolist(),
        "second_moment": moments.tolist(),
        "se": ses,
        "argmin": float(weights[int(np.argmin(moments))]),
        "reps": int(reps),
        "seed": int(seed),
        "config": {"lambda": float(lam), "rho": float(rho), "theta": float(theta),
                   "sigma": float(sigma), "gamma": float(rho * theta / sigma), "guard": float(guard)},
    }
