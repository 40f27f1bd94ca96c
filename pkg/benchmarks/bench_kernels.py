"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--n 200000]

Both backends produce bit-identical results; this only measures speed. The
end-to-end rows swap the backend used by the package for the whole call.
"""
import argparse
import contextlib
import timeit

import numpy as np

from tarthresh import kernels, preset_params
from tarthresh.harness import _finite_task, _limit_task


@contextlib.contextmanager
def using(backend):
    saved = kernels.tar_path, kernels.drop_walk, kernels.plateau_scan
    kernels.tar_path = backend.tar_path
    kernels.drop_walk = backend.drop_walk
    kernels.plateau_scan = backend.plateau_scan
    try:
        yield
    finally:
        kernels.tar_path, kernels.drop_walk, kernels.plateau_scan = saved


def cases(n):
    rng = np.random.default_rng(0)
    noise = rng.standard_normal(n)
    inc = rng.normal(-1.28, 1.6, size=n)
    vp = np.cumsum(rng.exponential(size=n))
    vm = np.cumsum(rng.exponential(size=n))
    sp = np.cumsum(rng.normal(-1.28, 1.6, size=n))
    sm = np.cumsum(rng.normal(-1.28, 1.6, size=n))
    params = preset_params("persistent-outer")
    finite_args = (params, 5000, 1, 1000, None)
    limit_args = (0.5, 0.8, 2.0, 1.0, 40.0, 1, 0.5)
    return {
        f"tar_path n={n}": lambda b: b.tar_path(noise, 0.0, 0.15, 0.95, 2.0, False),
        # a huge guard keeps the walk going over the whole array
        f"drop_walk n={n}": lambda b: b.drop_walk(inc, 0.0, 0.0, 1e300),
        f"plateau_scan 2x{n} events": lambda b: b.plateau_scan(vp, sp, vm, sm, 1e-9),
        "finite replicate n=5000 (x20)": lambda b: [_finite_task(finite_args, r) for r in range(20)],
        "limit replicate (x200)": lambda b: [_limit_task(limit_args, r) for r in range(200)],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=200_000)
    args = ap.parse_args()

    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))
    else:
        print("compiled extension not available; timing the fallback only")

    print(f"{'case':34s}" + "".join(f"{name:>12s}" for name, _ in backends) + f"{'speedup':>10s}")
    for label, fn in cases(args.n).items():
        times = []
        for _, backend in backends:
            with using(backend):
                times.append(min(timeit.repeat(lambda: fn(backend), number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{label:34s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
