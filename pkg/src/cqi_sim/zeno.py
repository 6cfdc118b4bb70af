"""Zeno slowdown and its time reverse on a freely precessing qubit.

The system qubit evolves as |Q(t)> = cos(wt)|0> + i sin(wt)|1>, i.e.
under U(t) = exp(i w t sigma_x), whose energy eigenstates are
(|0> +- |1>)/sqrt(2).  Measurement-like interactions are CNOTs with the
system as control.  Everything here is computed by explicit state
evolution; closed forms are reserved for the tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import NumericalValidationError
from .hilbert import Ket

__all__ = [
    "ZenoConfig",
    "TrajectoryResult",
    "free_qubit",
    "free_evolution_matrix",
    "zeno_pair",
    "time_reversed_zeno",
    "zeno_cancellation",
    "iterated_zeno",
]

MAX_ANCILLAS = 20


@dataclass(frozen=True)
class ZenoConfig:
    omega: float
    epsilon: float
    theta: float = 0.0
    n_ancillas: int = 0

    def __post_init__(self):
        if self.omega <= 0 or self.epsilon < 0:
            raise NumericalValidationError("omega must be positive and epsilon nonnegative")
        if self.n_ancillas < 0:
            raise NumericalValidationError("n_ancillas must be nonnegative")
        if self.omega * self.epsilon > 0.3:
            warnings.warn(
                "omega*epsilon > 0.3: leading-order Zeno statements degrade",
                stacklevel=2,
            )


def free_evolution_matrix(t: float, omega: float) -> np.ndarray:
    """U(t) = exp(i w t sigma_x) on the system qubit."""
    c, s = np.cos(omega * t), np.sin(omega * t)
    return np.array([[c, 1j * s], [1j * s, c]])


def free_qubit(t: float, omega: float) -> Ket:
    """State of the undisturbed qubit started in |0> at t = 0."""
    return Ket(free_evolution_matrix(t, omega)[:, 0], (2,))


def _evolve_factor0(state: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply a 2x2 unitary to the first factor of a multi-qubit state."""
    shape = state.shape
    return (u @ state.reshape(2, -1)).reshape(shape)


def _cnot_from_q(state: np.ndarray, target_axis: int) -> np.ndarray:
    """CNOT with the system (axis 0) as control and ``target_axis`` as target."""
    out = state.copy()
    flipped = np.flip(state, axis=target_axis)
    sel = [slice(None)] * state.ndim
    sel[0] = 1
    out[tuple(sel)] = flipped[tuple(sel)]
    return out


def zeno_pair(cfg: ZenoConfig) -> tuple[float, float]:
    """Transition probability seen by the final observer, without and with
    an intermediate entangling CNOT at t = epsilon.

    Both values come from explicit evolution of the full state vector
    followed by a partial trace onto the observer.
    """
    w, eps = cfg.omega, cfg.epsilon
    u = free_evolution_matrix(eps, w)

    # no intermediate ancilla: evolve 2*eps, then observer CNOT
    q = free_evolution_matrix(2 * eps, w)[:, 0]
    qb = np.zeros((2, 2), dtype=complex)
    qb[:, 0] = q
    qb = _cnot_from_q(qb, 1)
    rho_b = hilbert.reduced_state(Ket(qb.reshape(-1), (2, 2)), {1})
    p_plain = float(rho_b.matrix[1, 1].real)

    # intermediate ancilla CNOT at eps, observer CNOT at 2*eps
    qab = np.zeros((2, 2, 2), dtype=complex)
    qab[:, 0, 0] = u[:, 0]
    qab = _cnot_from_q(qab, 1)
    qab = _evolve_factor0(qab, u)
    qab = _cnot_from_q(qab, 2)
    rho_b = hilbert.reduced_state(Ket(qab.reshape(-1), (2, 2, 2)), {2})
    p_zeno = float(rho_b.matrix[1, 1].real)
    return p_plain, p_zeno


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    times: np.ndarray
    q_states: np.ndarray  # (len(times), 2) system amplitudes after the CNOT
    delta_t: float


def time_reversed_zeno(cfg: ZenoConfig, n_samples: int = 33) -> TrajectoryResult:
    """Disentangle a qubit from its ancilla and measure the evolution shift.

    The input is the entangled pair trajectory that an entangling CNOT
    would produce from a freely evolved qubit with phase parameter
    theta, i.e. at t = 0 the pair is cos(theta)|00> + i sin(theta)|11>.
    Undoing the CNOT at t = 0 leaves the qubit in the pure state
    |Q(theta/omega)>, so its subsequent free evolution runs ahead of an
    undisturbed clock by delta_t = theta/omega (behind it for negative
    theta).

    The shift is recovered from the trajectory by exact algebraic
    inversion at two sample times, not by fitting.
    """
    w, th = cfg.omega, cfg.theta
    pair = np.zeros((2, 2), dtype=complex)
    pair[0, 0] = np.cos(th)
    pair[1, 1] = 1j * np.sin(th)
    pair = _cnot_from_q(pair, 1)
    anc = pair[:, 0].copy()
    if np.linalg.norm(pair[:, 1]) > 1e-12:
        raise NumericalValidationError("CNOT failed to disentangle the ancilla")

    times = np.linspace(0.0, np.pi / w, n_samples)
    states = np.array([free_evolution_matrix(t, w) @ anc for t in times])

    def _phase(q: np.ndarray, t: float) -> float:
        return float(np.arctan2(q[1].imag, q[0].real) - w * t)

    d1 = _phase(states[0], times[0])
    d2 = _phase(states[n_samples // 4], times[n_samples // 4])
    d2 = d2 - 2 * np.pi * np.round((d2 - d1) / (2 * np.pi))
    if abs(d1 - d2) > 1e-10:
        raise NumericalValidationError("trajectory is not a shifted free evolution")
    return TrajectoryResult(times, states, float(d1 / w))


def zeno_cancellation(cfg: ZenoConfig, inverse_delay: float = 0.0, n_samples: int = 17) -> float:
    """Entangling CNOT followed by its inverse: distance from free evolution.

    With the inverse applied on the same slice the pair of CNOTs is the
    identity and the returned maximal trace distance is numerically
    zero.  A nonzero ``inverse_delay`` evolves the system between the
    two CNOTs; the resulting distance is reported, not asserted.
    """
    w, eps = cfg.omega, cfg.epsilon
    qa = np.zeros((2, 2), dtype=complex)
    qa[:, 0] = free_evolution_matrix(eps, w)[:, 0]
    qa = _cnot_from_q(qa, 1)
    if inverse_delay:
        qa = _evolve_factor0(qa, free_evolution_matrix(inverse_delay, w))
    qa = _cnot_from_q(qa, 1)

    worst = 0.0
    for t in np.linspace(0.0, np.pi / w, n_samples):
        evolved = _evolve_factor0(qa, free_evolution_matrix(t, w))
        rho_q = hilbert.reduced_state(Ket(evolved.reshape(-1), (2, 2)), {0})
        free = hilbert.density(free_qubit(eps + inverse_delay + t, w))
        worst = max(worst, hilbert.trace_distance(rho_q, free))
    return worst


def iterated_zeno(cfg: ZenoConfig) -> float:
    """Transition probability with n fresh ancillas at equal spacing.

    Total evolution time is fixed at 2*epsilon; the n ancilla CNOTs act
    at k * 2*epsilon/(n+1) and the observer CNOT at the end.  n = 0
    reproduces the plain case and n = 1 the single-ancilla Zeno case.
    """
    n = cfg.n_ancillas
    if n > MAX_ANCILLAS:
        raise NumericalValidationError(
            f"n_ancillas = {n} exceeds the dense-simulation guard ({MAX_ANCILLAS})"
        )
    w = cfg.omega
    t_tot = 2 * cfg.epsilon
    seg = free_evolution_matrix(t_tot / (n + 1), w)
    state = np.zeros((2,) * (n + 2), dtype=complex)
    state[(0,) * (n + 2)] = 1.0
    for k in range(n):
        state = _evolve_factor0(state, seg)
        state = _cnot_from_q(state, 1 + k)
    state = _evolve_factor0(state, seg)
    state = _cnot_from_q(state, n + 1)
    rho_b = hilbert.reduced_state(Ket(state.reshape(-1), (2,) * (n + 2)), {n + 1})
    return float(rho_b.matrix[1, 1].real)
