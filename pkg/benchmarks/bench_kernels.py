#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy twins.

Both backends run the same code (`kernels/reference.py`); the JIT variants
are that code compiled. Results are bit-identical, so this only measures
speed.

Usage:
    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from l2gtx.kernels import jit, reference


def timed(fn, *args, repeats=3, warmup=1):
    for _ in range(warmup):
        result = fn(*args)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def workloads():
    rng = np.random.default_rng(0)
    a = np.cumsum(rng.normal(size=500))
    b = np.cumsum(rng.normal(size=500))
    lo = np.zeros(500, np.int64)
    hi = np.full(500, 500, np.int64)
    yield "dtw_band (500x500 full window)", "dtw_band", (a, b, lo, hi)

    points = rng.normal(size=(500, 3))
    labels = rng.integers(0, 5, size=500)
    yield "silhouette_mean (n=500, k=5)", "silhouette_mean", (points, labels, 5)

    centroids = rng.normal(size=(6, 3))
    big = rng.normal(size=(20000, 3))
    yield "assign_to_centroids (n=20000, k=6)", "assign_to_centroids", (big, centroids)

    link_pts = rng.normal(size=(250, 3))
    yield "average_linkage (n=250)", "average_linkage", (link_pts,)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"{'kernel':<40} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    print("-" * 73)
    for label, name, payload in workloads():
        t_ref, r_ref = timed(getattr(reference, name), *payload, repeats=args.repeats)
        t_jit, r_jit = timed(getattr(jit, name), *payload, repeats=args.repeats)
        first_ref = r_ref[0] if isinstance(r_ref, tuple) else r_ref
        first_jit = r_jit[0] if isinstance(r_jit, tuple) else r_jit
        assert np.array_equal(np.asarray(first_ref), np.asarray(first_jit)), label
        print(
            f"{label:<40} {t_ref * 1000:>8.1f}ms {t_jit * 1000:>8.1f}ms "
            f"{t_ref / t_jit:>8.1f}x"
        )


if __name__ == "__main__":
    main()
