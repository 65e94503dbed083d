"""Time the numba kernels against the numpy fallbacks.

    python benchmarks/bench_kernels.py [--sizes 8,16,32] [--batch 301] [--sweep]

``--sweep`` also times a full default-grid sweep under each backend; that
needs a fresh interpreter per backend because the choice is made at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from lnasynth import kernels


def random_system(rng, m, n):
    a = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
    a += n * np.eye(n)
    b = rng.standard_normal((m, n, 2)) + 1j * rng.standard_normal((m, n, 2))
    return a, b


def random_stamps(rng, m, n, nnz):
    rows = rng.integers(0, n, nnz)
    cols = rng.integers(0, n, nnz)
    vals = rng.standard_normal((m, nnz)) + 1j * rng.standard_normal((m, nnz))
    return rows, cols, vals


def best_of(fn, repeat=5):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_kernels(sizes, batch):
    if kernels._solve_batch_numba is None:
        print("numba not installed; only the numpy fallback is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>4}{'batch':>7}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>9}")
    for n in sizes:
        a, b = random_system(rng, batch, n)
        x_np, _ = kernels._solve_batch_numpy(a, b)
        x_nb, _ = kernels._solve_batch_numba(a, b)  # also triggers compilation
        assert np.allclose(x_np, x_nb, rtol=1e-10, atol=1e-12)
        t_np = best_of(lambda: kernels._solve_batch_numpy(a, b))
        t_nb = best_of(lambda: kernels._solve_batch_numba(a, b))
        print(f"{'solve_batch':<16}{n:>4}{batch:>7}{t_np * 1e3:>13.3f}{t_nb * 1e3:>13.3f}{t_np / t_nb:>9.1f}")

        args = kernels._prep(n, *random_stamps(rng, batch, n, 6 * n))
        assert np.allclose(kernels._scatter_stamps_numpy(*args), kernels._scatter_stamps_numba(*args))
        t_np = best_of(lambda: kernels._scatter_stamps_numpy(*args))
        t_nb = best_of(lambda: kernels._scatter_stamps_numba(*args))
        print(f"{'scatter_stamps':<16}{n:>4}{batch:>7}{t_np * 1e3:>13.3f}{t_nb * 1e3:>13.3f}{t_np / t_nb:>9.1f}")


SWEEP_SNIPPET = """
import time
from lnasynth import kernels, default_technology
from lnasynth.explorer import SweepGrid, sweep
from lnasynth.synthesis import DesignSpec
spec, grid, tech = DesignSpec(), SweepGrid(), default_technology()
sweep(spec, SweepGrid((0.4e-3,), (40.0,)), tech)  # warm-up (JIT, caches)
t = time.perf_counter()
sweep(spec, grid, tech)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def bench_sweep():
    for flag in ("1", "0"):
        env = dict(os.environ, LNASYNTH_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SWEEP_SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"default sweep, {backend:<6} backend: {float(secs):.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,16,32,64")
    ap.add_argument("--batch", type=int, default=301)
    ap.add_argument("--sweep", action="store_true")
    args = ap.parse_args()
    bench_kernels([int(s) for s in args.sizes.split(",")], args.batch)
    if args.sweep:
        bench_sweep()


if __name__ == "__main__":
    main()
