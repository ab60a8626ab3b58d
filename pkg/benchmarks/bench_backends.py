"""Time the numba and numpy backends on the hot kernels and check they agree.

    python benchmarks/bench_backends.py [--n 1000000] [--repeat 3]

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed ``--repeat`` times; the best time is reported. Product
sums and the sieve must agree bit for bit, the t-grid to 1e-12.
"""
import argparse
import math
import time

import numpy as np

from mfcorr import _accel, _kernels
from mfcorr.sieve import small_primes


def best_time(fn, repeat):
    fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n):
    rng = np.random.default_rng(0)
    lam = rng.choice([-1.0, 1.0], size=(3, n + 16))
    primes = small_primes(math.isqrt(n))
    ps = small_primes(min(n, 2 * 10**6)).astype(np.float64)
    ph = rng.uniform(0.0, 2 * np.pi, ps.shape[0])
    frac = 0x6A09E667F3BCC908B2FB1366EA957D3E
    idx = np.arange(n, dtype=np.uint64)
    return {
        "product_sums J=3": (lambda: _kernels.product_sums(lam, None, [[0, 1, 2]],
                                                           [n // 100, n // 10, n], True), 0.0),
        "sieve_window": (lambda: _kernels.sieve_window(1, n, primes, 1 << 16), 0.0),
        "fixed_mul": (lambda: _kernels.fixed_mul(idx, frac), 0.0),
        "twist_grid 201 t": (lambda: _kernels.twist_grid(np.cos(ph), np.sin(ph), np.log(ps),
                                                         1.0 / ps, -100, 201, 0.01,
                                                         np.array([ps.shape[0]])), 1e-12),
    }


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.asarray(x, dtype=np.float64).ravel() for x in out])
    return np.asarray(out).ravel()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"N = {args.n}, threads = {_accel.get_threads()}, backends = {backends}")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  agree")
    for name, (fn, tol) in cases(args.n).items():
        times, outs = [], []
        for b in backends:
            with _accel.use_backend(b):
                t, out = best_time(fn, args.repeat)
            times.append(t)
            outs.append(_flat(out))
        if len(outs) == 2:
            diff = float(np.max(np.abs(outs[0] - outs[1]))) if outs[0].size else 0.0
            agree = "yes" if (diff <= tol if tol else np.array_equal(outs[0], outs[1])) else "NO"
            speed = f"{times[0] / times[1]:>9.1f}x"
        else:
            agree, speed = "-", f"{'-':>10}"
        print(f"{name:<20}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + f"{speed}  {agree}")


if __name__ == "__main__":
    main()
