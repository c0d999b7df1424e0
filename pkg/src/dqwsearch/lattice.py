"""Walker state on the periodic M x M grid.

The walker carries a two-component spinor (psi_l, psi_r) at every node
(p, q) with p, q in [0, M-1] and periodic index arithmetic on both axes.
Storage is struct-of-arrays: two contiguous complex128 planes, so the
coin-conditioned shifts are contiguous row/column moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class LatticeConfig:
    """Grid geometry and physical constants of one run.

    The potential center omega sits at (M/2 - 1/2, M/2 - 1/2), i.e.
    between the four central nodes, so no node ever coincides with it.
    """

    m: int
    e: float = -1.0
    q: float = 0.9
    mu: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ConfigError(f"grid size must be even and >= 2, got {self.m}")

    @property
    def n(self) -> int:
        return self.m * self.m

    @property
    def omega_x(self) -> float:
        return self.m / 2 - 0.5

    @property
    def omega_y(self) -> float:
        return self.m / 2 - 0.5


@dataclass
class WavefunctionField:
    """Spinor amplitudes on the grid; two (M, M) complex128 planes."""

    m: int
    psi_l: np.ndarray
    psi_r: np.ndarray

    def __post_init__(self):
        for plane in (self.psi_l, self.psi_r):
            if plane.shape != (self.m, self.m):
                raise ConfigError(
                    f"component plane shape {plane.shape} does not match m={self.m}"
                )
            if plane.dtype != np.complex128:
                raise ConfigError(f"components must be complex128, got {plane.dtype}")

    def copy(self) -> "WavefunctionField":
        return WavefunctionField(self.m, self.psi_l.copy(), self.psi_r.copy())


def init_uniform(config: LatticeConfig) -> WavefunctionField:
    """Fully delocalized start: every component of every node is 1/(M*sqrt(2))."""
    amp = 1.0 / (config.m * np.sqrt(2.0))
    psi_l = np.full((config.m, config.m), amp, dtype=np.complex128)
    psi_r = np.full((config.m, config.m), amp, dtype=np.complex128)
    return WavefunctionField(config.m, psi_l, psi_r)


def norm_squared(state: WavefunctionField) -> float:
    """Total probability sum(|psi_l|^2 + |psi_r|^2); pure observation."""
    return float(
        np.sum(np.abs(state.psi_l) ** 2) + np.sum(np.abs(state.psi_r) ** 2)
    )
