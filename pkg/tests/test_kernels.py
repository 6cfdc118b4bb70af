import numpy as np
import pytest
from numpy.testing import assert_allclose

from cqi_sim import _kernels

RNG = np.random.default_rng(2)


def random_points(n, rng=RNG):
    x = rng.uniform(-5, 5, n)
    t = rng.uniform(0.5, 3.0, n)
    amp = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x, t, amp


def test_backend_reported():
    assert _kernels.backend() in ("numba", "numpy")


def test_propagate_backends_agree():
    x_src, t_src, amp = random_points(300)
    x_out = np.linspace(-10, 10, 101)
    args = (x_out, 4.0, x_src, t_src, amp, 1.0, 1.0, 0.0)
    ref = _kernels.propagate_numpy(*args)
    active = _kernels.propagate(*args)
    assert_allclose(active, ref, rtol=1e-12, atol=1e-14)
    if _kernels.HAS_NUMBA:
        assert_allclose(_kernels.propagate_numba(*args), ref, rtol=1e-12, atol=1e-14)


def test_double_quad_backends_agree():
    xa, ta, aa = random_points(150)
    xb, tb, ab = random_points(170)
    tb += 5.0  # keep the time supports disjoint so eta = 0 is legal
    args = (xa, ta, aa, xb, tb, ab, 1.0, 1.0, 0.0)
    ref = _kernels.double_quad_numpy(*args)
    active = _kernels.double_quad(*args)
    assert abs(active - ref) <= 1e-12 * abs(ref)


def test_kernel_hermiticity():
    # W(p; q) = conj(W(q; p)) realized through the double quadrature
    xa, ta, aa = random_points(40)
    xb, tb, ab = random_points(40)
    tb += 4.0
    fwd = _kernels.double_quad(xa, ta, aa, xb, tb, ab, 1.0, 1.0, 0.0)
    rev = _kernels.double_quad(xb, tb, ab, xa, ta, aa, 1.0, 1.0, 0.0)
    assert abs(fwd - np.conj(rev)) < 1e-12 * abs(fwd)


def test_eta_damps_amplitude():
    x_out = np.array([3.0])
    x_src = np.array([0.0])
    t_src = np.array([0.0])
    amp = np.array([1.0 + 0j])
    plain = _kernels.propagate(x_out, 1.0, x_src, t_src, amp, 1.0, 1.0, 0.0)
    damped = _kernels.propagate(x_out, 1.0, x_src, t_src, amp, 1.0, 1.0, 0.2)
    assert abs(damped[0]) < abs(plain[0])


def test_point_kernel_value():
    # single source point against the closed form of the kernel
    m, hb, dt, dx = 1.3, 0.7, 0.9, 2.1
    out = _kernels.propagate(
        np.array([dx]), dt, np.array([0.0]), np.array([0.0]), np.array([1.0 + 0j]), m, hb, 0.0
    )
    expect = np.sqrt(m / (2j * np.pi * hb * dt)) * np.exp(1j * m * dx**2 / (2 * hb * dt))
    assert_allclose(out[0], expect, rtol=1e-12)
