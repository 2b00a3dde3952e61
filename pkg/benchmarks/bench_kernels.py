#!/usr/bin/env python3
"""Benchmark the hot kernels: numba @njit vs the pure-numpy fallback.

Both paths are also checked for byte-identical output. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cogito import kernels  # noqa: E402


def timeit(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_conv(size: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 255, size=(size, size))
    kern = kernels.gaussian_kernel(2.0, 6)
    radius = kern.shape[0] // 2
    padded = np.pad(img, radius, mode="reflect")
    out_a = np.empty_like(img)
    out_b = np.empty_like(img)

    kernels._conv2d_numba(padded, np.ascontiguousarray(kern), out_a)  # compile
    t_numba = timeit(lambda: kernels._conv2d_numba(padded, kern, out_a), repeat)
    t_numpy = timeit(lambda: kernels._conv2d_numpy(padded, kern, out_b), repeat)
    same = np.array_equal(out_a, out_b)
    print(f"conv2d {size}x{size} (13x13 taps): numba {t_numba*1e3:8.2f} ms | "
          f"numpy {t_numpy*1e3:8.2f} ms | speedup {t_numpy/t_numba:5.2f}x | "
          f"identical={same}")


def bench_noise(size: int, repeat: int) -> None:
    rng = np.random.default_rng(1)
    cell = 8
    lattice = rng.uniform(0, 1, size=(3, size // cell + 2, size // cell + 2))
    out_a = np.empty((size, size, 3), dtype=np.uint8)
    out_b = np.empty((size, size, 3), dtype=np.uint8)

    kernels._noise_numba(np.ascontiguousarray(lattice), cell, out_a)  # compile
    t_numba = timeit(lambda: kernels._noise_numba(lattice, cell, out_a), repeat)
    t_numpy = timeit(lambda: kernels._noise_numpy(lattice, cell, out_b), repeat)
    same = np.array_equal(out_a, out_b)
    print(f"value_noise {size}x{size}x3:        numba {t_numba*1e3:8.2f} ms | "
          f"numpy {t_numpy*1e3:8.2f} ms | speedup {t_numpy/t_numba:5.2f}x | "
          f"identical={same}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels._HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    bench_conv(args.size, args.repeat)
    bench_noise(args.size, args.repeat)


if __name__ == "__main__":
    main()
