import math

import numpy as np
import pytest

from tarthresh import DegenerateModelError, TarParams, gamma_weight_sweep, run_finite_convergence, run_limit_table
from tarthresh.errors import ConfigError
from tarthresh.harness import TABLE_PROBS, limit_sample, replicate_seed, summarize

GP = dict(lam=0.5, rho=0.8, theta=2.0, sigma=1.0)


def test_replicate_seed_streams():
    a = np.random.default_rng(replicate_seed(7, 3)).random(4)
    b = np.random.default_rng(replicate_seed(7, 3)).random(4)
    c = np.random.default_rng(replicate_seed(7, 4)).random(4)
    assert a.tobytes() == b.tobytes() and not np.array_equal(a, c)


def test_summarize_formulas(rng):
    x = rng.normal(size=5000)
    s = summarize(x, (0.1, 0.5, 0.9))
    assert s["quantiles"] == list(np.quantile(x, [0.1, 0.5, 0.9]))
    assert s["mean_se"] == pytest.approx(x.std(ddof=1) / math.sqrt(x.size))
    m2 = np.mean(x**2)
    assert s["second_moment"] == pytest.approx(m2)
    assert s["second_moment_se"] == pytest.approx(math.sqrt((np.mean(x**4) - m2**2) / x.size))
    # type 7: linear interpolation between order statistics
    assert summarize([1.0, 2.0, 3.0, 4.0], (0.25,))["quantiles"] == [1.75]


@pytest.fixture(scope="module")
def table_5000():
    return run_limit_table(**GP, reps=5000, seed=11, workers=2)


def test_table_shape(table_5000):
    rep = table_5000
    assert list(rep.samples) == ["MLE", "BE"] and rep.probs == TABLE_PROBS
    for label in ("MLE", "BE"):
        q = rep.quantiles(label)
        assert q.size == 8 and np.all(np.diff(q) >= 0)
    assert rep.config["gamma"] == pytest.approx(1.6)
    d = rep.to_dict()
    assert "samples" not in d and d["seed"] == 11 and d["reps"] == 5000
    assert len(rep.to_dict(emit_samples=True)["samples"]["MLE"]) == 5000


def test_bayes_beats_mle(table_5000):
    assert table_5000.second_moment("BE")[0] < table_5000.second_moment("MLE")[0]


def test_median_symmetry():
    rep = run_limit_table(**GP, reps=5000, probs=(0.5,), seed=2)
    for label in ("MLE", "BE"):
        x = rep.samples[label]
        # asymptotic SE of the median: 1 / (2 f(m) sqrt(N)), f from a local histogram
        h = 0.25
        fm = np.mean(np.abs(x - np.median(x)) < h) / (2 * h)
        assert abs(rep.quantiles(label)[0]) < 3 / (2 * fm * math.sqrt(x.size))


def test_prefix_reproduces():
    full = run_limit_table(**GP, reps=2000, seed=5)
    half = run_limit_table(**GP, reps=1000, seed=5)
    for label in ("MLE", "BE"):
        assert full.samples[label][:1000].tobytes() == half.samples[label].tobytes()


def test_worker_invariance():
    a = limit_sample(**GP, reps=1200, seed=9, workers=1)
    b = limit_sample(**GP, reps=1200, seed=9, workers=3)
    for x, y in zip(a, b):
        assert x.tobytes() == y.tobytes()


@pytest.mark.parametrize("kwargs", [dict(reps=999), dict(probs=(0.0, 0.5)), dict(probs=()), dict(workers=0)])
def test_table_config_errors(kwargs):
    base = dict(GP, reps=1000, seed=0)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        run_limit_table(**base)


def test_finite_convergence_small():
    p = TarParams(0.15, 0.95, 1.0, 2.0)
    rep = run_finite_convergence(p, n=1000, reps=100, seed=3, limit_reps=2000, lam=0.13, workers=2)
    assert set(rep.samples) == {"Simulated", "SimulatedBE", "MLE", "BE"}
    assert rep.samples["Simulated"].size == 100 and rep.samples["MLE"].size == 2000
    assert rep.extra["failures"] == 0
    assert 0 <= rep.extra["ks_mle"] <= 1
    assert rep.config["lambda_source"] == "given" and rep.config["limit_seed"] == 4
    again = run_finite_convergence(p, n=1000, reps=100, seed=3, limit_reps=2000, lam=0.13, workers=1)
    assert again.samples["Simulated"].tobytes() == rep.samples["Simulated"].tobytes()


def test_finite_convergence_counts_failures(monkeypatch):
    from tarthresh import harness

    real = harness.simulate_tar

    def flaky(params, n, seed, burn_in):
        if seed.spawn_key == (2,):
            raise harness.TarError("boom")
        return real(params, n, seed=seed, burn_in=burn_in)

    monkeypatch.setattr(harness, "simulate_tar", flaky)
    rep = run_finite_convergence(TarParams(0.15, 0.95, 1.0, 2.0), n=500, reps=5, seed=0,
                                 limit_reps=1000, lam=0.13)
    assert rep.extra["failures"] == 1 and rep.samples["Simulated"].size == 4
    assert "rep 2" in rep.extra["failure_messages"][0]


def test_finite_convergence_guards():
    with pytest.raises(DegenerateModelError):
        run_finite_convergence(TarParams(0.5, 0.5, 1.0, 2.0), n=1000, reps=10)
    with pytest.raises(ConfigError):
        run_finite_convergence(TarParams(0.15, 0.95, 1.0, 2.0), n=499, reps=10)


@pytest.fixture(scope="module")
def sweep():
    return gamma_weight_sweep(**GP, reps=5000, seed=13, workers=2)


def test_sweep_symmetry(sweep):
    m, se = np.array(sweep["second_moment"]), np.array(sweep["se"])
    assert sweep["weights"][0] == 0.0 and sweep["weights"][-1] == 1.0 and len(m) == 11
    for i in range(11):
        j = 10 - i
        assert abs(m[i] - m[j]) < 3 * max(se[i], se[j])


def test_sweep_validation():
    with pytest.raises(ConfigError):
        gamma_weight_sweep(**GP, weights=[0.0, 1.0], reps=10)
    with pytest.raises(ConfigError):
        gamma_weight_sweep(**GP, weights=[0.0, 0.5, 1.2], reps=10)
