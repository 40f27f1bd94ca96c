import math

import numpy as np
import pytest
from scipy.stats import norm

from tarthresh import ConfigError, DomainError, NumericFailure, TarParams, intensity, kde, simulate_tar, solve_density
from tarthresh import density as dmod
from tarthresh.density import make_grid, silverman_bandwidth


@pytest.fixture(scope="module")
def text_solution():
    return solve_density(TarParams(0.15, 0.95, 1.0, 2.0))


@pytest.mark.parametrize("rho", [0.0, 0.5, -0.7, 0.95])
def test_ar1_collapse(rho):
    p = TarParams(rho, rho, 1.0, 1.0)
    sol = solve_density(p)
    exact = norm.pdf(sol.grid, scale=1.0 / math.sqrt(1.0 - rho * rho))
    assert np.max(np.abs(sol.values - exact)) < 1e-6


def test_solution_invariants(text_solution):
    sol = text_solution
    assert np.all(sol.values >= 0)
    assert sol.integral == pytest.approx(1.0, abs=1e-8)
    assert np.max(np.abs(sol.values - sol.values[::-1])) < 1e-8
    assert sol.residual < 1e-10
    assert sol.lam > 0


def test_grid_has_nodes_at_threshold(text_solution):
    g = text_solution.grid
    assert np.any(g == 2.0) and np.any(g == -2.0)
    assert g.size == 2001 and g[-1] >= dmod.default_x_max(text_solution.params) - 1e-12


def test_intensity_definitions(text_solution):
    two = intensity(text_solution, "two-sided")
    one = intensity(text_solution, "one-sided")
    assert two == 2 * one == text_solution.lam
    # reported for comparison with the nominal 0.5 used for the limit tables
    assert 0.12 < text_solution.lam < 0.14


def test_intensity_white_noise():
    sol = solve_density(TarParams(0.0, 0.0, 1.0, 1.0))
    assert sol.lam == pytest.approx(2 * norm.pdf(1.0), abs=1e-8)
    assert sol.lam == pytest.approx(0.48394, abs=1e-5)


def test_intensity_theta_off_grid(text_solution):
    sol = text_solution
    far = type(sol)(sol.grid[:100], sol.values[:100], sol.lam, sol.residual, sol.iterations, sol.params)
    with pytest.raises(DomainError):
        intensity(far)
    with pytest.raises(DomainError):
        sol(1e3)


def test_one_sided_solution():
    p = TarParams(0.15, 0.6, 1.0, 0.5, -1.0, 2.0, sidedness="one-sided")
    sol = solve_density(p)
    assert sol.integral == pytest.approx(1.0, abs=1e-8)
    assert sol.lam == pytest.approx(float(sol(0.5)))
    x = simulate_tar(p, 50_000, seed=6).values
    core = np.abs(sol.grid) <= 4
    assert np.max(np.abs(kde(x, sol.grid[core]) - sol.values[core])) < 0.02


def test_solver_against_kde(text_solution):
    sol = text_solution
    x = simulate_tar(sol.params, 50_000, seed=11).values
    core = np.abs(sol.grid) <= 4
    assert np.max(np.abs(kde(x, sol.grid[core]) - sol.values[core])) < 0.02


def test_nonconvergence_reports_residual():
    with pytest.raises(NumericFailure) as info:
        solve_density(TarParams(0.15, 0.95, 1.0, 2.0), max_iter=3)
    assert info.value.details["residual"] > 1e-10


@pytest.mark.parametrize("kwargs", [dict(x_max=4.0), dict(points=400), dict(points=1000), dict(tol=0.0)])
def test_solver_config_errors(kwargs):
    with pytest.raises(ConfigError):
        solve_density(TarParams(0.15, 0.95, 1.0, 2.0), **kwargs)


def test_state_check_catches_violations():
    p = TarParams(0.15, 0.95, 1.0, 2.0)
    grid, _ = make_grid(p, 10.0, 401)
    f = norm.pdf(grid)
    dmod._check_state(f, grid, p, 0)
    with pytest.raises(NumericFailure):
        dmod._check_state(np.where(grid > 5, -1e-3, f), grid, p, 1)
    with pytest.raises(NumericFailure):
        dmod._check_state(1.01 * f, grid, p, 1)
    with pytest.raises(NumericFailure):
        dmod._check_state(norm.pdf(grid, loc=1e-3), grid, p, 1)


def test_every_iteration_is_checked(monkeypatch):
    seen = []
    real = dmod._check_state
    monkeypatch.setattr(dmod, "_check_state", lambda f, g, p, it: (seen.append(it), real(f, g, p, it)))
    sol = solve_density(TarParams(0.15, 0.95, 1.0, 2.0))
    assert seen == list(range(sol.iterations + 1))


@pytest.fixture(scope="module")
def normal_sample():
    return simulate_tar(TarParams(0.0, 0.0, 1.0, 1.0), 50_000, seed=21).values


def test_kde_normal_sample(normal_sample):
    g = np.linspace(-3, 3, 601)
    assert np.max(np.abs(kde(normal_sample, g) - norm.pdf(g))) < 0.015


def test_kde_far_tails(normal_sample):
    g = np.array([-12.0, -10.5, 10.5, 12.0])
    assert np.all(kde(normal_sample, g) < 1e-6)


def test_kde_bandwidth_smoothing(normal_sample):
    g = np.linspace(-1, 1, 201)
    est = kde(normal_sample, g)
    mode = g[np.argmax(est)]
    bw = silverman_bandwidth(normal_sample)
    assert kde(normal_sample, [mode], 2 * bw)[0] < kde(normal_sample, [mode], bw)[0]


def test_kde_bandwidth_rule(normal_sample):
    assert silverman_bandwidth(normal_sample) == pytest.approx(
        1.06 * np.std(normal_sample, ddof=1) * normal_sample.size ** -0.2
    )
    with pytest.raises(ConfigError):
        kde(normal_sample, [0.0], 0.0)
    with pytest.raises(ConfigError):
        kde(normal_sample, [0.0], -1.0)
