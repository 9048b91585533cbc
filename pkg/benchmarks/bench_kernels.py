"""Time the hot kernels under the numba and pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from essnorm import _kernels


def cases():
    rng = np.random.default_rng(0)
    zeros = 0.8 * rng.random(4) * np.exp(2j * np.pi * rng.random(4))
    th = 2 * np.pi * rng.random(1 << 18)
    z = 0.999 * np.exp(1j * th)
    targets = np.sort(2 * np.pi * rng.random(1 << 14))
    pts = 0.95 * rng.random(64) * np.exp(2j * np.pi * rng.random(64))
    thetas = 2 * np.pi * np.arange(4096) / 4096
    log_n = np.log([1.0, 2.0, 3.0, 5.0])
    coeffs = np.array([1, 2, 1, 0.5], dtype=complex)
    return {
        "blaschke_eval 2^18 pts, k=4": lambda: _kernels.blaschke_eval(z, zeros, 1.0),
        "lifted_angle 2^18 pts, k=4": lambda: _kernels.lifted_angle(th, zeros, 0.0),
        "invert_lifted_angle 2^14 targets": lambda: _kernels.invert_lifted_angle(targets, zeros, 0.0, 0.0, 2 * np.pi),
        "dirichlet_time_average 2e6 steps": lambda: _kernels.dirichlet_time_average(log_n, coeffs, -1e4, 0.01, 2_000_001, 4.0),
        "carleson_hat_grid 64 pts x 4096": lambda: _kernels.carleson_hat_grid(pts, np.ones(64), thetas),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    table = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        for name, fn in cases().items():
            fn()  # warm-up (compilation / caches)
            best = min(_time(fn) for _ in range(args.repeat))
            table.setdefault(name, {})[backend] = best
    print(f"{'kernel':<38} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for name, t in table.items():
        print(f"{name:<38} {t['numba'] * 1e3:>11.2f} {t['numpy'] * 1e3:>11.2f} {t['numpy'] / t['numba']:>8.1f}")


def _time(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
