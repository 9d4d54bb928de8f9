"""Timing comparison of the JIT and pure-numpy kernel backends.

Runs the two hot paths (all-points two-nearest-neighbor search behind the
TwoNN estimator, and the batched curvature fit behind MAPC) on the same
synthetic clouds under both backends and prints a small table. JIT
compilation happens in an untimed warm-up pass.

Usage: python3 benchmarks/bench_backends.py [--n 4000] [--ambient 16] [--repeats 3]
"""

import argparse
import os
import time

from manifold_scope._backend import ENV_BACKEND, active_backend
from manifold_scope.curvature import manifold_mapc
from manifold_scope.id_estimators import twonn_estimate
from manifold_scope.synthetic import SynthSpec, sample


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=4000, help="points per cloud")
    parser.add_argument("--ambient", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=3, help="take the best of this many runs")
    args = parser.parse_args()

    cube = sample(
        SynthSpec(kind="hypercube", intrinsic_dim=2, ambient_dim=args.ambient, n_points=args.n)
    )
    ball = sample(
        SynthSpec(kind="sphere", intrinsic_dim=2, ambient_dim=args.ambient, n_points=args.n)
    )
    tasks = [
        ("twonn (N=%d, D=%d)" % (args.n, args.ambient), lambda: twonn_estimate(cube)),
        ("mapc  (N=%d, D=%d)" % (args.n, args.ambient), lambda: manifold_mapc(ball, 2)),
    ]

    timings = {}
    for backend in ("numba", "numpy"):
        os.environ[ENV_BACKEND] = backend
        assert active_backend() == backend
        for name, fn in tasks:
            if backend == "numba":
                fn()  # compile outside the timed region
            timings[(name, backend)] = _time(fn, args.repeats)

    print("%-24s %12s %12s %9s" % ("kernel", "numba [s]", "numpy [s]", "speedup"))
    for name, _ in tasks:
        jit = timings[(name, "numba")]
        plain = timings[(name, "numpy")]
        print("%-24s %12.3f %12.3f %8.1fx" % (name, jit, plain, plain / jit))


if __name__ == "__main__":
    main()
