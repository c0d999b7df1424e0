"""One step of the walk: U = phase . R(theta-) . S2 . R(theta+) . S1.

These are the reference implementations, written as plain array
operations so each sub-operation can be checked in isolation and the
whole step can be compared against a dense matrix build of U. The
multi-step drivers in `backend` run a fused single-pass stencil that
must agree with this composition to near machine precision.

Shift semantics (axis 0 shown; S2 is identical on axis 1):
  (S1 psi)^L[p, q] = psi^L[p+1 mod M, q]
  (S1 psi)^R[p, q] = psi^R[p-1 mod M, q]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import WavefunctionField
from .potential import PhaseTable


@dataclass(frozen=True)
class CoinAngles:
    """The two coin angles theta+- = +-pi/4 - mu/2.

    Their sum is -mu: for the massless walker the two rotations undo
    each other on the uniform spinor (1, 1)/sqrt(2).
    """

    theta_plus: float
    theta_minus: float

    @classmethod
    def from_mass(cls, mu: float = 0.0) -> "CoinAngles":
        return cls(theta_plus=math.pi / 4 - mu / 2, theta_minus=-math.pi / 4 - mu / 2)


def shift_1(state: WavefunctionField) -> WavefunctionField:
    """Coin-conditioned translation along the first axis."""
    return WavefunctionField(
        state.m,
        np.roll(state.psi_l, -1, axis=0),
        np.roll(state.psi_r, +1, axis=0),
    )


def shift_2(state: WavefunctionField) -> WavefunctionField:
    """Coin-conditioned translation along the second axis."""
    return WavefunctionField(
        state.m,
        np.roll(state.psi_l, -1, axis=1),
        np.roll(state.psi_r, +1, axis=1),
    )


def coin_rotate(state: WavefunctionField, theta: float) -> WavefunctionField:
    """Mix the spinor components at every node:
    (l, r) <- (cos(theta) l + i sin(theta) r, i sin(theta) l + cos(theta) r)."""
    c = math.cos(theta)
    s = 1j * math.sin(theta)
    return WavefunctionField(
        state.m,
        c * state.psi_l + s * state.psi_r,
        s * state.psi_l + c * state.psi_r,
    )


def apply_phase(state: WavefunctionField, phases: PhaseTable) -> WavefunctionField:
    """Diagonal oracle: both components at (p, q) pick up e^{-i e phi}."""
    if phases.m != state.m:
        raise ConfigError(
            f"phase table size {phases.m} does not match state size {state.m}"
        )
    factor = np.exp(-1j * phases.values)
    return WavefunctionField(state.m, factor * state.psi_l, factor * state.psi_r)


def step(
    state: WavefunctionField, phases: PhaseTable, angles: CoinAngles
) -> WavefunctionField:
    """One application of the walk operator (rightmost factor first)."""
    out = shift_1(state)
    out = coin_rotate(out, angles.theta_plus)
    out = shift_2(out)
    out = coin_rotate(out, angles.theta_minus)
    return apply_phase(out, phases)
