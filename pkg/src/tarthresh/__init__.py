"""Threshold estimation for threshold autoregressive (TAR) models.

Exact piecewise likelihood in the threshold, centre-of-gravity MLE and
Bayesian posterior-mean estimators, the stationary-density solver giving the
limit Poisson intensity, and a simulator for the limit likelihood-ratio
process with a reproducible Monte Carlo harness.
"""
__version__ = "0.1.0"

from .density import DensitySolution, intensity, kde, solve_density
from .errors import (
    ConfigError,
    DegenerateModelError,
    DomainError,
    EmptyInputError,
    NumericFailure,
    TarError,
)
from .harness import McReport, gamma_weight_sweep, run_finite_convergence, run_limit_table
from .kernels import BACKEND
from .likelihood import PiecewiseLikelihood, Prior, bayes_finite, build_piecewise, loglik_at, mle_finite
from .limit import (
    LimitEstimate,
    LimitPath,
    bayes_limit,
    char_fn_analytic,
    mle_limit,
    sample_compound_poisson,
    sample_limit_path,
)
from .model import Sidedness, TarParams, Trajectory, preset_params, simulate_tar

__all__ = [
    "BACKEND", "ConfigError", "DegenerateModelError", "DensitySolution", "DomainError",
    "EmptyInputError", "LimitEstimate", "LimitPath", "McReport", "NumericFailure",
    "PiecewiseLikelihood", "Prior", "Sidedness", "TarError", "TarParams", "Trajectory",
    "bayes_finite", "bayes_limit", "build_piecewise", "char_fn_analytic", "gamma_weight_sweep",
    "intensity", "kde", "loglik_at", "mle_finite", "mle_limit", "preset_params",
    "run_finite_convergence", "run_limit_table", "sample_compound_poisson", "sample_limit_path",
    "simulate_tar", "solve_density",
]
