"""Benchmark the compiled scan kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""
from __future__ import annotations

import time

import numpy as np

from sirdiff import _kernels_py

try:
    from sirdiff import _kernels
except ImportError:
    _kernels = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    dt = 1e-4
    n_steps = 20_000
    pos = np.ascontiguousarray(
        np.cumsum(rng.standard_normal((n_steps, 2)) * np.sqrt(dt), axis=0))
    target = np.array([2.0, 0.0])
    bridge_u = rng.random(n_steps - 1)
    points = rng.uniform(-2, 4, size=(2048, 2))

    workloads = [
        ("first_hit (no bridge)", "first_hit", (pos, target, 1.0, dt)),
        ("first_hit (bridge)", "first_hit", (pos, target, 1.0, dt, bridge_u)),
        ("occupation", "occupation", (pos, target, 1.0, dt)),
        ("covered_mask 2048pts", "covered_mask", (points, pos[:2000], 1.0)),
        ("covered_prob 2048pts", "covered_prob", (points, pos[:2000], 1.0, dt)),
        ("exposure_sum 2048pts", "exposure_sum", (points, pos[:2000], dt, 0, 1.0)),
    ]

    print(f"{'workload':<26} {'numpy':>10} {'cython':>10} {'speedup':>9}")
    for label, name, args in workloads:
        t_py = _time(getattr(_kernels_py, name), *args)
        if _kernels is not None:
            t_cy = _time(getattr(_kernels, name), *args)
            print(f"{label:<26} {t_py*1e3:>8.2f}ms {t_cy*1e3:>8.2f}ms "
                  f"{t_py/t_cy:>8.1f}x")
        else:
            print(f"{label:<26} {t_py*1e3:>8.2f}ms {'n/a':>10} {'n/a':>9}")
    if _kernels is None:
        print("compiled extension not available; showing fallback only")


if __name__ == "__main__":
    main()
