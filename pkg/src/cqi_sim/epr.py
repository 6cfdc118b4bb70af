"""EPR pair with quantized observers: correlations without collapse.

Both halves of an entangled pair are measured by local CNOT-style
interactions with observer qubits.  All statistics, including the
perfect cross correlations, come from reduced states of the single
global pure state; nothing nonlocal ever happens to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import NumericalValidationError
from .hilbert import DensityOp, Ket
from .utils import is_unitary

__all__ = ["EprConfig", "epr_final_state", "epr_reduced", "no_communication_check"]

# factor order of the global state
Q1, A, Q2, B = 0, 1, 2, 3


@dataclass(frozen=True, eq=False)
class EprConfig:
    alpha: complex
    beta: complex
    alice_unitary: np.ndarray | None = None

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > 1e-10:
            raise NumericalValidationError("pair amplitudes must satisfy |a|^2+|b|^2 = 1")
        if self.alice_unitary is not None:
            u = np.asarray(self.alice_unitary, dtype=complex)
            if u.shape != (2, 2) or not is_unitary(u, 1e-10):
                raise NumericalValidationError("alice_unitary must be a 2x2 unitary")
            object.__setattr__(self, "alice_unitary", u)


def _measure(state: np.ndarray, source: int, observer: int) -> np.ndarray:
    """CNOT with ``source`` as control and ``observer`` as target."""
    out = state.copy()
    sel = [slice(None)] * state.ndim
    sel[source] = 1
    out[tuple(sel)] = np.flip(state, axis=observer)[tuple(sel)]
    return out


def epr_final_state(cfg: EprConfig, order: tuple[int, int] = (0, 1)) -> Ket:
    """Global state after both local measurements, factors (Q1, A, Q2, B).

    ``order`` selects which measurement is applied first; the two local
    interactions commute, so the result is order-independent.
    """
    state = np.zeros((2, 2, 2, 2), dtype=complex)
    state[0, 0, 0, 0] = cfg.alpha
    state[1, 0, 1, 0] = cfg.beta
    steps = [(Q1, A), (Q2, B)]
    for who in order:
        state = _measure(state, *steps[who])
    if cfg.alice_unitary is not None:
        state = np.moveaxis(
            np.tensordot(cfg.alice_unitary, state, axes=(1, A)), 0, A
        )
    return Ket(state.reshape(-1), (2, 2, 2, 2))


def epr_reduced(cfg: EprConfig) -> tuple[DensityOp, DensityOp, DensityOp]:
    """(rho_A, rho_B, rho_AB) for the two observers."""
    ket = epr_final_state(cfg)
    rho_a = hilbert.reduced_state(ket, {A})
    rho_b = hilbert.reduced_state(ket, {B})
    rho_ab = hilbert.reduced_state(ket, {A, B})
    return rho_a, rho_b, rho_ab


def no_communication_check(cfg: EprConfig) -> float:
    """Trace distance of Bob's state with and without Alice's local unitary.

    Zero (to rounding) for every unitary: local operations on Alice's
    side never move information to Bob.
    """
    if cfg.alice_unitary is None:
        raise NumericalValidationError("no_communication_check needs alice_unitary")
    rho_b_plain = hilbert.reduced_state(
        epr_final_state(EprConfig(cfg.alpha, cfg.beta)), {B}
    )
    rho_b_rotated = hilbert.reduced_state(epr_final_state(cfg), {B})
    return hilbert.trace_distance(rho_b_plain, rho_b_rotated)
