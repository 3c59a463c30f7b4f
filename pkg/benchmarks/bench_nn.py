"""Benchmark the nearest-neighbor backends on identical inputs.

Compares the compiled cell-grid kernel against the pure KD-tree fallback and
the O(n^2) reference, and checks that all three agree exactly.

Run: python3 benchmarks/bench_nn.py [--sizes 1000,5000,20000] [--reps 5]
"""

import argparse
import time

import numpy as np

from mnncoop.mnnr import nn_indices_bruteforce
from mnncoop._nnpure import nn_indices as nn_pure

try:
    from mnncoop._nncore import nn_indices as nn_compiled
except ImportError:
    nn_compiled = None


def _time(fn, pts, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(pts)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,5000,20000,50000")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>8}  {'pure [ms]':>10}  {'compiled [ms]':>13}  {'speedup':>8}")
    for n in sizes:
        side = np.sqrt(n)  # unit intensity
        pts = np.ascontiguousarray(rng.uniform(0.0, side, (n, 2)))
        t_pure = _time(nn_pure, pts, args.reps)
        if nn_compiled is None:
            print(f"{n:>8}  {1e3 * t_pure:>10.2f}  {'(not built)':>13}  {'-':>8}")
            continue
        t_comp = _time(nn_compiled, pts, args.reps)
        same = np.array_equal(nn_pure(pts), nn_compiled(pts))
        if n <= 5000:
            same = same and np.array_equal(nn_compiled(pts), nn_indices_bruteforce(pts))
        tag = "" if same else "  MISMATCH"
        print(
            f"{n:>8}  {1e3 * t_pure:>10.2f}  {1e3 * t_comp:>13.2f}"
            f"  {t_pure / t_comp:>7.2f}x{tag}"
        )


if __name__ == "__main__":
    main()
