"""Benchmark the hot propagator kernels: numba JIT vs pure numpy.

Run:  python benchmarks/bench_kernels.py [n_out] [n_src]

The first numba call includes compilation; it is timed separately and
then re-timed from cache, matching how the kernels are used in practice
(many calls per process).
"""

import sys
import time

import numpy as np

sys.path.insert(0, "src")

from cqi_sim import _kernels  # noqa: E402


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    n_out = int(sys.argv[1]) if len(sys.argv) > 1 else 2048
    n_src = int(sys.argv[2]) if len(sys.argv) > 2 else 30_000
    rng = np.random.default_rng(0)
    x_out = np.linspace(-25, 25, n_out)
    x_src = rng.uniform(-1, 1, n_src)
    t_src = rng.uniform(3.0, 3.2, n_src)
    amp = (rng.standard_normal(n_src) + 1j * rng.standard_normal(n_src)) * 1e-3
    args = (x_out, 4.2, x_src, t_src, amp, 1.0, 1.0, 0.0)

    print(f"propagate: {n_out} targets x {n_src} sources "
          f"({n_out * n_src / 1e6:.0f}M kernel evaluations)")
    ref, t_np = timed(_kernels.propagate_numpy, *args)
    print(f"  numpy   : {t_np:.3f} s")
    if _kernels.HAS_NUMBA:
        t0 = time.perf_counter()
        out = _kernels.propagate_numba(*args)
        t_compile = time.perf_counter() - t0
        out, t_nb = timed(_kernels.propagate_numba, *args)
        err = np.max(np.abs(out - ref)) / np.max(np.abs(ref))
        print(f"  numba   : {t_nb:.3f} s  (first call incl. compile: {t_compile:.2f} s)")
        print(f"  speedup : {t_np / t_nb:.1f}x   max rel deviation {err:.1e}")
    else:
        print("  numba   : not available (CQI_SIM_NO_NUMBA set or numba missing)")

    n_a = n_b = int(np.sqrt(n_out * n_src / 4))
    xa = rng.uniform(-1, 1, n_a)
    ta = rng.uniform(3.0, 3.2, n_a)
    aa = rng.standard_normal(n_a) + 1j * rng.standard_normal(n_a)
    xb = rng.uniform(-1, 1, n_b)
    tb = rng.uniform(4.0, 4.2, n_b)
    ab = rng.standard_normal(n_b) + 1j * rng.standard_normal(n_b)
    args2 = (xa, ta, aa, xb, tb, ab, 1.0, 1.0, 1e-4)

    print(f"double_quad: {n_a} x {n_b} pairs")
    ref2, t_np2 = timed(_kernels.double_quad_numpy, *args2)
    print(f"  numpy   : {t_np2:.3f} s")
    if _kernels.HAS_NUMBA:
        _kernels.double_quad_numba(*args2)  # warm the cache
        out2, t_nb2 = timed(_kernels.double_quad_numba, *args2)
        err2 = abs(out2 - ref2) / abs(ref2)
        print(f"  numba   : {t_nb2:.3f} s")
        print(f"  speedup : {t_np2 / t_nb2:.1f}x   rel deviation {err2:.1e}")


if __name__ == "__main__":
    main()
