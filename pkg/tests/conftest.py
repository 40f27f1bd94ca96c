import numpy as np
import pytest

from tarthresh import TarParams, kernels, preset_params


@pytest.fixture
def text_params():
    return preset_params("persistent-outer")


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def kernel_backends():
    out = [pytest.param(kernels.python_backend, id="python")]
    if kernels.compiled_backend is not None:
        out.append(pytest.param(kernels.compiled_backend, id="cython"))
    return out


def quantize_to_lattice(values, alpha, h):
    """Move every |x| onto the lattice alpha + k h, keeping the sign.

    Lattice values are produced by the same expression the quadrature oracles
    use for cell edges, so breakpoints land exactly on cell boundaries.
    """
    x = np.asarray(values, dtype=np.float64)
    k = np.round((np.abs(x) - alpha) / h)
    return np.sign(x) * (alpha + k * h)


def iid_params(theta=1.0):
    return TarParams(0.0, 0.0, 1.0, theta, 0.5, 3.5)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record ``(number, title, ok, detail)`` for the acceptance summary."""

    def record(number, title, ok, detail=""):
        _CRITERIA[number] = (title, bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} | {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
