"""Small shared helpers."""

from __future__ import annotations

import numpy as np


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random d x d unitary via QR of a complex Ginibre matrix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Composite trapezoid weights for n uniformly spaced points."""
    if n == 1:
        return np.array([1.0])
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w
