#!/usr/bin/env python3
"""Time the numeric kernels on the compiled and pure-python backends.

Each kernel runs on a seeded random image at a few square sizes; the
best wall time over the repeat count is reported per backend, together
with the speedup of the compiled extension. When the extension is not
built, only the python column appears.

Run from a checkout as ``python benchmarks/bench_kernels.py``.
"""

import argparse
import time

import numpy as np

from blurmoments._kernels import fallback

try:
    from blurmoments._kernels import _core as compiled
except ImportError:
    compiled = None


def make_inputs(size, n_snapshots, rng):
    pixels = np.ascontiguousarray(rng.random((size, size)))
    half = (size - 1) / 2.0
    x = np.ascontiguousarray(np.arange(size, dtype=np.float64) - half)
    y = np.ascontiguousarray(half - np.arange(size, dtype=np.float64))
    row_off = np.linspace(-3.0, 3.0, n_snapshots)
    col_off = np.linspace(2.5, -1.5, n_snapshots)
    betas = np.linspace(-0.25, 0.25, n_snapshots)
    return pixels, x, y, row_off, col_off, betas, half


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def fmt_seconds(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[128, 256, 512],
                        help="square image sizes to benchmark")
    parser.add_argument("--repeats", type=int, default=5,
                        help="repeat count; the best time is kept")
    parser.add_argument("--snapshots", type=int, default=33,
                        help="snapshot count for the mean kernels")
    parser.add_argument("--max-order", type=int, default=8,
                        help="moment table order along each axis")
    args = parser.parse_args()

    if compiled is None:
        print("compiled extension not built; timing the python backend only")
    rng = np.random.default_rng(7)

    header = f"{'kernel':<14}{'size':>7}{'python':>12}"
    if compiled is not None:
        header += f"{'compiled':>12}{'speedup':>9}"
    print(header)

    for size in args.sizes:
        px, x, y, row_off, col_off, betas, pivot = make_inputs(
            size, args.snapshots, rng)
        jobs = (
            ("moment_table",
             lambda mod: mod.moment_table(px, x, y,
                                          args.max_order, args.max_order)),
            ("mean_shifted",
             lambda mod: mod.mean_shifted(px, row_off, col_off)),
            ("mean_rotated",
             lambda mod: mod.mean_rotated(px, betas, pivot, pivot)),
        )
        for name, call in jobs:
            t_py = best_time(lambda: call(fallback), args.repeats)
            line = f"{name:<14}{size:>6}²{fmt_seconds(t_py):>12}"
            if compiled is not None:
                t_c = best_time(lambda: call(compiled), args.repeats)
                line += f"{fmt_seconds(t_c):>12}{t_py / t_c:>8.2f}x"
            print(line)


if __name__ == "__main__":
    main()
