"""Coulomb phase table and seeded white-noise overlays.

The table stores the product e*phi (not phi alone) so the phase
operator is a single complex multiply per component; the walker charge
e is folded in at construction. Noise perturbs phi, so overlays add
e*B to the stored values.

Randomness is counter-based: each (master_seed, realization[, step])
tuple keys an independent Philox stream, so realizations and steps can
be sampled in any order, on any thread, with bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .lattice import LatticeConfig

NOISE_KINDS = ("none", "spatial", "spatiotemporal")


@dataclass(frozen=True)
class PhaseTable:
    """Grid of e*phi values in radians plus the pre-noise signal scale.

    signal_max is max|phi| of the clean potential (0.9*sqrt(2) for the
    defaults), the reference scale for the noise-to-signal ratio r; it
    is computed before any overlay and carried through unchanged.
    charge_e is kept so overlays can convert a sampled B into e*B.
    """

    m: int
    values: np.ndarray
    kind: str = "static"
    signal_max: float = 0.0
    charge_e: float = -1.0

    def __post_init__(self):
        if self.values.shape != (self.m, self.m):
            raise ConfigError(
                f"phase table shape {self.values.shape} does not match m={self.m}"
            )
        if self.kind not in ("static", "per-step"):
            raise ConfigError(f"unknown phase table kind {self.kind!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """What noise to apply and how to seed it."""

    kind: str = "none"
    r: float = 0.0
    master_seed: int = 12345
    realizations: int = 1

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.r < 0:
            raise ConfigError(f"noise ratio must be non-negative, got {self.r}")
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")

    def b_max(self, signal_max: float) -> float:
        return self.r * signal_max


def build_coulomb_table(config: LatticeConfig) -> PhaseTable:
    """Phase table of the point-charge potential centered between the
    four central nodes: values[p, q] = e*Q / dist((p, q), omega).

    The lattice spacing epsilon cancels for a 1/r potential (the
    potential is sampled at physical distance epsilon*dist and enters
    the step phase multiplied by the same epsilon), so the table is
    epsilon-free. No node coincides with omega for even M, so the
    denominator never vanishes.
    """
    m = config.m
    coords = np.arange(m, dtype=np.float64)
    dp = coords[:, None] - config.omega_x
    dq = coords[None, :] - config.omega_y
    dist = np.sqrt(dp * dp + dq * dq)
    phi = config.q / dist
    return PhaseTable(
        m=m,
        values=config.e * phi,
        kind="static",
        signal_max=float(np.max(np.abs(phi))),
        charge_e=config.e,
    )


def _noise_field(m: int, b_max: float, master_seed: int, spawn_key: tuple) -> np.ndarray:
    """I.i.d. uniform B on the open interval (-b_max, b_max), keyed by spawn_key."""
    seq = np.random.SeedSequence(master_seed, spawn_key=spawn_key)
    rng = np.random.Generator(np.random.Philox(seq))
    b = (2.0 * rng.random((m, m)) - 1.0) * b_max
    if b_max > 0.0:
        # rng.random() can return exactly 0, which would land on -b_max;
        # the interval is open, so clamp one ulp inward.
        np.maximum(b, np.nextafter(-b_max, 0.0), out=b)
    return b


def _overlaid(table: PhaseTable, b: np.ndarray, kind: str) -> PhaseTable:
    return PhaseTable(
        m=table.m,
        values=table.values + table.charge_e * b,
        kind=kind,
        signal_max=table.signal_max,
        charge_e=table.charge_e,
    )


def overlay_spatial_noise(table: PhaseTable, spec: NoiseSpec, realization: int) -> PhaseTable:
    """Time-independent overlay: values += e*B, fixed for every step of
    one realization, deterministic in (master_seed, realization)."""
    if spec.kind != "spatial":
        raise ConfigError(f"spatial overlay requested for noise kind {spec.kind!r}")
    b = _noise_field(table.m, spec.b_max(table.signal_max), spec.master_seed, (realization,))
    return _overlaid(table, b, "static")


def sample_spatiotemporal_noise(
    table: PhaseTable, spec: NoiseSpec, realization: int, j: int
) -> PhaseTable:
    """Per-step overlay: B resampled independently at every step j,
    deterministic in (master_seed, realization, j)."""
    if spec.kind != "spatiotemporal":
        raise ConfigError(f"spatiotemporal overlay requested for noise kind {spec.kind!r}")
    b = _noise_field(table.m, spec.b_max(table.signal_max), spec.master_seed, (realization, j))
    return _overlaid(table, b, "per-step")
