"""Benchmark the compiled tabulation kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--points N]

The hot loops of assembly are Dubiner tabulation (values + gradients)
and 1D Legendre tabulation; everything downstream is BLAS. This script
times both backends on identical inputs and checks they agree.
"""

import argparse
import time

import numpy as np

from rdmix.kernels import _ref

try:
    from rdmix.kernels import _fast
except ImportError:
    _fast = None


def time_fn(fn, *args, repeat=7):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    pts = rng.random((args.points, 2)) * 0.5
    s = np.linspace(-1, 1, args.points)

    backends = [("python", _ref)] + ([("cython", _fast)] if _fast else [])
    if _fast is None:
        print("compiled backend not built; timing fallback only")

    print(f"{'kernel':34s} " + "".join(f"{name:>12s}" for name, _ in backends)
          + ("     speedup" if _fast else ""))
    rows = [
        ("dubiner_tab k=3 values", lambda m: m.dubiner_tab(3, pts)),
        ("dubiner_tab k=3 values+grads", lambda m: m.dubiner_tab(3, pts, True)),
        ("dubiner_tab k=6 values+grads", lambda m: m.dubiner_tab(6, pts, True)),
        ("dubiner_tab k=9 values+grads", lambda m: m.dubiner_tab(9, pts, True)),
        ("legendre_tab n=10", lambda m: m.legendre_tab(10, s)),
    ]
    for label, call in rows:
        times = [time_fn(call, mod) for _, mod in backends]
        line = f"{label:34s} " + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"  {times[0] / times[1]:9.2f}x"
        print(line)

    if _fast is not None:
        v1, gx1, gy1 = _ref.dubiner_tab(7, pts, True)
        v2, gx2, gy2 = _fast.dubiner_tab(7, pts, True)
        err = max(np.abs(v1 - v2).max(), np.abs(gx1 - gx2).max(),
                  np.abs(gy1 - gy2).max())
        print(f"\nbackend agreement (k=7, values+grads): max |diff| = {err:.3e}")


if __name__ == "__main__":
    main()
