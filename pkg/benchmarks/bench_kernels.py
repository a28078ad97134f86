"""Compare the compiled and pure-numpy token-encoding kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 64,512,4096] [--dim 768]
"""

import argparse
import time

import numpy as np

from slicebug import kernels


def bench(backend, hashes, dim, repeats):
    backend.encode_hashes(hashes, kernels.DEFAULT_SEED, dim)  # warm up
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        backend.encode_hashes(hashes, kernels.DEFAULT_SEED, dim)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,512,4096",
                        help="comma-separated token counts to benchmark")
    parser.add_argument("--dim", type=int, default=768)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if kernels.cython_backend is None:
        print("compiled backend unavailable; benchmarking numpy only")
    print(f"dim={args.dim}  best of {args.repeats} runs")
    print(f"{'tokens':>8} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for n in sizes:
        hashes = rng.integers(0, 2**64, size=n, dtype=np.uint64)
        t_np = bench(kernels.numpy_backend, hashes, args.dim, args.repeats)
        row = f"{n:>8} {t_np * 1e3:>10.3f}ms"
        if kernels.cython_backend is not None:
            t_cy = bench(kernels.cython_backend, hashes, args.dim, args.repeats)
            a = kernels.cython_backend.encode_hashes(
                hashes, kernels.DEFAULT_SEED, args.dim)
            b = kernels.numpy_backend.encode_hashes(
                hashes, kernels.DEFAULT_SEED, args.dim)
            assert a.tobytes() == b.tobytes(), "backends disagree"
            row += f" {t_cy * 1e3:>10.3f}ms {t_np / t_cy:>8.2f}x"
        print(row)
    if kernels.cython_backend is not None:
        print("outputs verified bit-identical across backends")


if __name__ == "__main__":
    main()
