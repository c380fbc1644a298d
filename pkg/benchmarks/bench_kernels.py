"""Compare the numba and numpy paths of the hot kernels, and the end-to-end suite under each.

    python benchmarks/bench_kernels.py [--points 8192] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from lckverify import _accel, _kernels


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def inv_inputs(n, d, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d, d))
    val = a @ np.swapaxes(a, 1, 2) + d * np.eye(d)
    grad = rng.normal(size=(n, d, d, d))
    hess = rng.normal(size=(n, d, d, d, d))
    return val, grad, hess + np.swapaxes(hess, -1, -2)


# the first call in a fresh process includes loading cached machine code; report the warm second call
SUITE = ("import time; from lckverify.suite import run_suite; d = {'model': 'hopf-deformed', 'n': %d}; "
         "run_suite(d, samples=16); t = time.perf_counter(); run_suite(d, samples=%d); "
         "print(time.perf_counter() - t)")


def suite_time(disable, n, samples):
    env = dict(os.environ, LCKVERIFY_DISABLE_JIT="1" if disable else "0")
    # first process populates the numba on-disk cache
    for _ in range(2):
        out = subprocess.run([sys.executable, "-c", SUITE % (n, samples)], env=env, capture_output=True,
                             text=True, check=True)
    return float(out.stdout.strip())


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--points", type=int, default=8192)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    rows = []
    for d in (4, 6):
        val, grad, hess = inv_inputs(args.points, d)
        t_np = best_of(lambda: _kernels.inv_jet_np(val, grad, hess), args.repeat)
        t_nb = best_of(lambda: _kernels.inv_jet_nb(val, grad, hess), args.repeat)
        rows.append((f"inv_jet d={d} order 2", t_np, t_nb))
    v = np.random.default_rng(1).normal(size=args.points * 32)
    w = np.random.default_rng(2).random(args.points * 32)
    rows.append(("weighted_sum", best_of(lambda: _kernels.weighted_sum_np(v, w), args.repeat),
                 best_of(lambda: _kernels.weighted_sum_nb(v, w), args.repeat)))
    for n in (2, 3):
        rows.append((f"suite hopf-deformed n={n} (1024 pts)", suite_time(True, n, 1024), suite_time(False, n, 1024)))

    print(f"{'kernel':<36} {'numpy [ms]':>11} {'numba [ms]':>11} {'speed-up':>9}")
    for name, a, b in rows:
        print(f"{name:<36} {1e3 * a:>11.2f} {1e3 * b:>11.2f} {a / b:>8.2f}x")


if __name__ == "__main__":
    main()
