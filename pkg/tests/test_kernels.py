"""Compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tarthresh import kernels
from tarthresh import _pykernels as py

from conftest import kernel_backends

needs_compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    if kernels.compiled_backend is not None:
        assert kernels.backend is kernels.compiled_backend


@pytest.mark.parametrize("backend", kernel_backends())
@pytest.mark.parametrize("one_sided", [False, True])
def test_tar_path_matches_reference_loop(backend, one_sided):
    noise = np.random.default_rng(1).standard_normal(1000)
    out = backend.tar_path(noise, 0.0, 0.15, 0.95, 2.0, one_sided)
    x, ref = 0.0, [0.0]
    for e in noise:
        z = x if one_sided else abs(x)
        x = (0.15 if z < 2.0 else 0.95) * x + e
        ref.append(x)
    assert out.tobytes() == np.array(ref).tobytes()


@needs_compiled
@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    rho1=st.floats(-1.5, 1.5),
    rho2=st.floats(-0.99, 0.99),
    theta=st.floats(0.01, 5.0),
    one_sided=st.booleans(),
)
def test_tar_path_backends_identical(seed, rho1, rho2, theta, one_sided):
    noise = np.random.default_rng(seed).standard_normal(300)
    a = kernels.compiled_backend.tar_path(noise, 0.0, rho1, rho2, theta, one_sided)
    b = py.tar_path(noise, 0.0, rho1, rho2, theta, one_sided)
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("backend", kernel_backends())
def test_drop_walk_stops_at_first_drop(backend):
    inc = np.array([1.0, 2.0, -1.0, -2.5, 5.0])
    stop, levels, level, peak = backend.drop_walk(inc, 0.0, 0.0, 3.0)
    # levels 1, 3, 2, -0.5: -0.5 < 3 - 3 first at index 3
    assert stop == 3
    np.testing.assert_array_equal(levels, [1.0, 3.0, 2.0, -0.5])
    assert (level, peak) == (-0.5, 3.0)
    stop, levels, level, peak = backend.drop_walk(np.array([0.5, 0.5]), 1.0, 2.0, 3.0)
    assert stop == -1 and levels.tolist() == [1.5, 2.0] and peak == 2.0


@needs_compiled
@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), guard=st.floats(0.5, 20.0))
def test_drop_walk_backends_identical(seed, guard):
    inc = np.random.default_rng(seed).normal(-0.5, 1.5, size=200)
    a = kernels.compiled_backend.drop_walk(inc, 0.0, 0.0, guard)
    b = py.drop_walk(inc, 0.0, 0.0, guard)
    assert a[0] == b[0] and a[1].tobytes() == b[1].tobytes() and a[2:] == b[2:]


def _random_sides(rng, kp, km):
    vp = np.cumsum(rng.exponential(size=kp))
    vm = np.cumsum(rng.exponential(size=km))
    sp = np.cumsum(rng.normal(-1.28, 1.6, size=kp))
    sm = np.cumsum(rng.normal(-1.28, 1.6, size=km))
    return vp, sp, vm, sm


def _brute_plateau(vp, sp, vm, sm):
    """Enumerate all constancy intervals and take the first maximum."""
    segs = [(-vm[k + 1], -vm[k], sm[k]) for k in range(len(vm) - 1)]
    segs.append((-vm[0], vp[0], 0.0))
    segs += [(vp[k], vp[k + 1], sp[k]) for k in range(len(vp) - 1)]
    segs.sort()
    vals = np.array([s[2] for s in segs])
    i = int(np.argmax(vals))
    w = np.exp(vals - vals.max())
    lo = np.array([s[0] for s in segs])
    hi = np.array([s[1] for s in segs])
    return lo[i], hi[i], np.sum(w * (hi**2 - lo**2) / 2), np.sum(w * (hi - lo))


@pytest.mark.parametrize("backend", kernel_backends())
def test_plateau_scan_against_enumeration(backend, rng):
    for _ in range(200):
        kp, km = rng.integers(1, 30, size=2)
        vp, sp, vm, sm = _random_sides(rng, kp, km)
        lo, hi, tie, smax, jp, jm, ip, im = backend.plateau_scan(vp, sp, vm, sm, 1e-9)
        blo, bhi, bj, bi = _brute_plateau(vp, sp, vm, sm)
        assert not tie
        assert (lo, hi) == (blo, bhi)
        np.testing.assert_allclose([jp + jm, ip + im], [bj, bi], rtol=1e-12, atol=1e-12)


@needs_compiled
def test_plateau_scan_backends_identical(rng):
    for _ in range(300):
        kp, km = rng.integers(1, 40, size=2)
        args = _random_sides(rng, kp, km)
        assert kernels.compiled_backend.plateau_scan(*args, 1e-9) == py.plateau_scan(*args, 1e-9)


@pytest.mark.parametrize("backend", kernel_backends())
def test_plateau_scan_ties(backend):
    # maxima on the far minus segment and the plus segment, not adjacent
    vp = np.array([1.0, 2.0, 3.0])
    sp = np.array([0.5, -1.0, -2.0])
    vm = np.array([1.0, 2.0, 3.0])
    sm = np.array([-1.0, 0.5, -3.0])
    lo, hi, tie, *_ = backend.plateau_scan(vp, sp, vm, sm, 1e-9)
    assert tie and (lo, hi) == (-3.0, -2.0)
    # adjacent equal plateaus merge into one interval
    sp = np.array([0.0, -1.0, -2.0])
    sm = np.array([-1.0, -2.0, -3.0])
    lo, hi, tie, *_ = backend.plateau_scan(vp, sp, vm, sm, 1e-9)
    assert not tie and (lo, hi) == (-1.0, 2.0)
