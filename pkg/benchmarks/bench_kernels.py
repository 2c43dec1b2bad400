"""Benchmark the Cython kernel backend against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [n_points]

Theta-series kernel evaluations dominate every quadrature in the package,
so this is the hot path worth compiling.
"""

import cmath
import sys
import time

from helikon.lattice import Lattice
from helikon import _kernels_py

try:
    from helikon import _kernels_cy
except ImportError:
    _kernels_cy = None


def sample_points(n):
    # deterministic scatter across a few cells, away from lattice points
    pts = []
    for k in range(n):
        s = (0.12 + 0.761 * k) % 2.3 - 0.9
        t = (0.31 + 0.577 * k) % 1.7 - 0.6
        pts.append(complex(s + 0.051, t + 0.037))
    return pts


def bench(mod, lat, pts, tol):
    q = lat.q
    tau = lat.tau
    t0 = time.perf_counter()
    acc = 0.0
    for u in pts:
        acc += abs(mod.wp_raw(u, tau, q, lat.eta1, tol))
        acc += abs(mod.zeta_raw(u, tau, q, lat.eta1, lat.eta2, tol))
        acc += abs(mod.sigma_raw(u, tau, q, lat.eta1, lat.eta2, tol))
    dt = time.perf_counter() - t0
    return dt, acc


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    lat = Lattice(1j)
    pts = sample_points(n)
    tol = 1e-14

    t_py, acc_py = bench(_kernels_py, lat, pts, tol)
    print(f"python : {n} points x 3 kernels in {t_py:.3f} s "
          f"({3 * n / t_py:.0f} evals/s)")
    if _kernels_cy is None:
        print("cython : not built")
        return
    t_cy, acc_cy = bench(_kernels_cy, lat, pts, tol)
    print(f"cython : {n} points x 3 kernels in {t_cy:.3f} s "
          f"({3 * n / t_cy:.0f} evals/s)")
    print(f"speedup: {t_py / t_cy:.1f}x   (checksum drift {abs(acc_py - acc_cy):.3g})")


if __name__ == "__main__":
    main()
