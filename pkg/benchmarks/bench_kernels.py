"""Times each hot kernel on both backends (numba JIT vs numpy/stdlib).

Usage: python benchmarks/bench_kernels.py [--sizes small|full]

The package itself selects a backend once at import via FAIRBOARD_NUMBA;
this script imports both implementation modules directly and races them
on identical inputs, checking agreement as it goes.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fairboard.kernels import _numpy

try:
    from fairboard.kernels import _numba
except ImportError:
    _numba = None


def _time(fn, *args, repeats: int = 5) -> float:
    fn(*args)  # warm (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_crc(size: int, rng) -> list[tuple[str, float]]:
    data = rng.bytes(size)
    rows = [("crc32c/numpy", _time(_numpy.crc32c, data))]
    if _numba:
        assert _numba.crc32c(data) == _numpy.crc32c(data)
        rows.append(("crc32c/numba", _time(_numba.crc32c, data)))
    return rows


def bench_confusion(n: int, rng) -> list[tuple[str, float]]:
    scores = rng.random(n)
    labels = rng.integers(0, 2, n).astype(np.int64)
    gids = rng.integers(0, 8, n).astype(np.int64)
    thr = rng.random(8)
    rows = [("group_confusion/numpy", _time(_numpy.group_confusion, scores, labels, gids, thr))]
    if _numba:
        assert np.array_equal(
            _numba.group_confusion(scores, labels, gids, thr),
            _numpy.group_confusion(scores, labels, gids, thr),
        )
        rows.append(("group_confusion/numba", _time(_numba.group_confusion, scores, labels, gids, thr)))
    return rows


def bench_pearson(n: int, rng) -> list[tuple[str, float]]:
    x = rng.random(n)
    y = 0.5 * x + rng.random(n)
    rows = [("pearson_moments/numpy", _time(_numpy.pearson_moments, x, y))]
    if _numba:
        a = _numba.pearson_moments(x, y)
        b = _numpy.pearson_moments(x, y)
        assert all(abs(u - v) < 1e-6 * max(1.0, abs(v)) for u, v in zip(a, b))
        rows.append(("pearson_moments/numba", _time(_numba.pearson_moments, x, y)))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", choices=["small", "full"], default="full")
    args = parser.parse_args()
    crc_size, n = (1 << 16, 100_000) if args.sizes == "small" else (1 << 22, 2_000_000)

    rng = np.random.default_rng(0)
    print(f"crc buffer: {crc_size} bytes; array length: {n}")
    if _numba is None:
        print("numba not importable: numpy fallback only")
    rows: list[tuple[str, float]] = []
    rows += bench_crc(crc_size, rng)
    rows += bench_confusion(n, rng)
    rows += bench_pearson(n, rng)

    print(f"\n{'kernel':<28} {'best time':>12} {'throughput':>16}")
    for name, seconds in rows:
        unit = crc_size if name.startswith("crc") else n
        per = unit / seconds / 1e6
        what = "MB/s" if name.startswith("crc") else "Melem/s"
        print(f"{name:<28} {seconds * 1e3:>9.3f} ms {per:>11.1f} {what}")
    by_kernel: dict[str, dict[str, float]] = {}
    for name, seconds in rows:
        kernel, backend = name.split("/")
        by_kernel.setdefault(kernel, {})[backend] = seconds
    print()
    for kernel, backends in by_kernel.items():
        if "numba" in backends:
            print(f"{kernel}: numba is {backends['numpy'] / backends['numba']:.1f}x the fallback")


if __name__ == "__main__":
    main()
