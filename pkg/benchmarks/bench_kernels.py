"""Time every kernel in its numba and numpy flavour on the same inputs.

    python3 benchmarks/bench_kernels.py [--walkers 100000] [--steps 1000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from eodpersist import _accel, kernels


def best_of(fn, args, repeat):
    fn(*args)  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--walkers", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--resamples", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.Generator(np.random.Philox(0))
    n, T = args.walkers, args.steps
    words = rng.integers(0, 2 ** 64, size=(n, -(-T // 64)), dtype=np.uint64)
    prices = kernels.pm1_prices_np(words, T + 1000, T)
    ff = kernels.first_flips_np(prices, 0)
    idx = rng.integers(0, 224, size=(args.resamples, 224))
    x = np.log(np.arange(1, 201, dtype=float))
    y = -0.4 * x + rng.normal(0, 0.01, 200)

    cases = [
        ("pm1_prices", (words, T + 1000, T)),
        ("first_flips", (prices, 0)),
        ("survival_counts", (ff, T)),
        ("resampled_counts", (ff[:224] % 60, idx, 60)),
        ("breakpoint_sse", (x, y)),
    ]
    print(f"{'kernel':<18}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, a in cases:
        tj = best_of(getattr(kernels, name + "_jit"), a, args.repeat)
        tn = best_of(getattr(kernels, name + "_np"), a, args.repeat)
        print(f"{name:<18}{tj:>12.5f}{tn:>12.5f}{tn / tj:>10.1f}")


if __name__ == "__main__":
    main()
