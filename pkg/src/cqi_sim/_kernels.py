"""Hot numerical kernels: pairwise free-propagator sums.

Both operations below are O(n_out * n_src) or O(n_a * n_b) loops over
complex exponentials and dominate the runtime of every propagator-based
computation.  They are JIT-compiled with numba when available; setting
the environment variable ``CQI_SIM_NO_NUMBA=1`` (or running without
numba installed) selects the pure-numpy fallback.  ``CQI_SIM_THREADS``
caps the numba thread count.

The kernel is the normalized free-particle amplitude

    W(x,t; x',t') = sqrt(m / (2 pi i hbar (dt - i eta)))
                    * exp(i m (x-x')^2 / (2 hbar (dt - i eta)))

with dt = t - t' and an optional damping parameter eta >= 0 that
rotates the time difference slightly into the complex plane.  Callers
must keep dt != 0 whenever eta == 0.
"""

from __future__ import annotations

import math
import os

import numpy as np

_TWO_PI = 2.0 * math.pi

_want_numba = os.environ.get("CQI_SIM_NO_NUMBA", "0") not in ("1", "true", "yes")
try:  # pragma: no cover - exercised via backend selection
    if not _want_numba:
        raise ImportError
    import numba
    from numba import njit, prange

    _threads = os.environ.get("CQI_SIM_THREADS")
    if _threads:
        numba.set_num_threads(max(1, int(_threads)))
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def propagate_numpy(x_out, t_out, x_src, t_src, amp, mass, hbar, eta):
    """out[j] = sum_i W(x_out[j], t_out; x_src[i], t_src[i]) * amp[i].

    ``amp`` carries the quadrature weights of the source points.
    """
    out = np.zeros(x_out.size, dtype=np.complex128)
    if x_src.size == 0:
        return out
    # chunk the source axis to bound the (n_out, chunk) temporaries
    chunk = max(1, int(4_000_000 // max(x_out.size, 1)))
    for s in range(0, x_src.size, chunk):
        dt = t_out - t_src[s : s + chunk]
        denom = eta + 1j * dt
        pref = np.sqrt(mass / (_TWO_PI * hbar * denom))
        dx = x_out[:, None] - x_src[None, s : s + chunk]
        phase = np.exp((1j * mass / (2.0 * hbar)) * dx * dx / (dt - 1j * eta))
        out += phase @ (pref * amp[s : s + chunk])
    return out


def double_quad_numpy(x_a, t_a, amp_a, x_b, t_b, amp_b, mass, hbar, eta):
    """sum_ij conj(amp_a[i]) W(p_a[i]; p_b[j]) amp_b[j] (weights folded in)."""
    acc = 0.0 + 0.0j
    if x_a.size == 0 or x_b.size == 0:
        return acc
    chunk = max(1, int(4_000_000 // max(x_b.size, 1)))
    for s in range(0, x_a.size, chunk):
        dt = t_a[s : s + chunk, None] - t_b[None, :]
        denom = eta + 1j * dt
        pref = np.sqrt(mass / (_TWO_PI * hbar * denom))
        dx = x_a[s : s + chunk, None] - x_b[None, :]
        w = pref * np.exp((1j * mass / (2.0 * hbar)) * dx * dx / (dt - 1j * eta))
        acc += np.conj(amp_a[s : s + chunk]) @ w @ amp_b
    return acc


if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def _propagate_numba(x_out, t_out, x_src, t_src, amp, mass, hbar, eta):
        n_out = x_out.size
        n_src = x_src.size
        out = np.empty(n_out, dtype=np.complex128)
        for j in prange(n_out):
            acc = 0.0 + 0.0j
            for i in range(n_src):
                dt = t_out - t_src[i]
                pref = np.sqrt(mass / (_TWO_PI * hbar * (eta + 1j * dt)))
                dx = x_out[j] - x_src[i]
                acc += (
                    pref
                    * np.exp((1j * mass / (2.0 * hbar)) * dx * dx / (dt - 1j * eta))
                    * amp[i]
                )
            out[j] = acc
        return out

    @njit(parallel=True, cache=True)
    def _double_quad_numba(x_a, t_a, amp_a, x_b, t_b, amp_b, mass, hbar, eta):
        n_a = x_a.size
        n_b = x_b.size
        acc = np.zeros(n_a, dtype=np.complex128)
        for i in prange(n_a):
            row = 0.0 + 0.0j
            for j in range(n_b):
                dt = t_a[i] - t_b[j]
                pref = np.sqrt(mass / (_TWO_PI * hbar * (eta + 1j * dt)))
                dx = x_a[i] - x_b[j]
                row += (
                    pref
                    * np.exp((1j * mass / (2.0 * hbar)) * dx * dx / (dt - 1j * eta))
                    * amp_b[j]
                )
            acc[i] = np.conj(amp_a[i]) * row
        return acc.sum()

    def propagate_numba(x_out, t_out, x_src, t_src, amp, mass, hbar, eta):
        return _propagate_numba(x_out, t_out, x_src, t_src, amp, mass, hbar, eta)

    def double_quad_numba(x_a, t_a, amp_a, x_b, t_b, amp_b, mass, hbar, eta):
        return complex(
            _double_quad_numba(x_a, t_a, amp_a, x_b, t_b, amp_b, mass, hbar, eta)
        )

    propagate = propagate_numba
    double_quad = double_quad_numba
    BACKEND = "numba"
else:
    propagate = propagate_numpy
    double_quad = double_quad_numpy
    BACKEND = "numpy"


def backend() -> str:
    """Active kernel backend, "numba" or "numpy"."""
    return BACKEND
