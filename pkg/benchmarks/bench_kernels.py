"""Numba versus numpy timings for the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported side by side, so ``TMD_SIM_BACKEND`` is
irrelevant here. JIT compilation happens in a warm-up call outside the timings.
"""
import argparse
import time

import numpy as np

from tmdsim import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cases = []
    for n_max, n_bins in [(20, 256), (60, 1024), (400, 4096), (2000, 16384)]:
        cases.append((f"occupancy_table n_max={n_max} N={n_bins}",
                      lambda n=n_max, b=n_bins: kernels.occupancy_table_numpy(n, b),
                      lambda n=n_max, b=n_bins: kernels.occupancy_table_numba(n, b)))

    rng = np.random.default_rng(0)
    for rows, n_photons, n_bins in [(65536, 10, 16), (65536, 40, 1024), (262144, 20, 256)]:
        bins = rng.integers(0, n_bins, size=(rows, n_photons))
        survived = rng.random((rows, n_photons)) < 0.85
        cases.append((f"count_occupied {rows}x{n_photons} N={n_bins}",
                      lambda b=bins, s=survived: kernels.count_occupied_numpy(b, s),
                      lambda b=bins, s=survived: kernels.count_occupied_numba(b, s)))

    print(f"{'kernel':<44}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, slow, fast in cases:
        np.testing.assert_array_equal(slow(), fast())  # also warms the JIT
        t_np = best_of(slow, args.repeat)
        t_nb = best_of(fast, args.repeat)
        print(f"{name:<44}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
