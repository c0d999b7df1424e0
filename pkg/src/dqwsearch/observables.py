"""Localization probability, spatial distributions, height ratio, and
peak detection for the P_j time series."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigError
from .lattice import WavefunctionField


@dataclass
class TimeSeries:
    """P_j for j = 0..J plus provenance metadata."""

    m: int
    probs: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 1 or self.probs.size < 1:
            raise ConfigError("time series must be a non-empty 1-d array")
        # tiny negative rounding is not tolerated: probabilities only
        if np.any(self.probs < -1e-15) or np.any(self.probs > 1.0 + 1e-12):
            raise ConfigError("series values must lie in [0, 1]")

    @property
    def entries(self):
        return list(enumerate(self.probs.tolist()))


@dataclass
class DistributionSnapshot:
    """Spatial probability distribution d_{j,p,q} at one step."""

    m: int
    j: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.m, self.m):
            raise ConfigError(
                f"snapshot shape {self.values.shape} does not match m={self.m}"
            )


@dataclass(frozen=True)
class PeakRecord:
    """Detected first and second localization peaks.

    Missing peaks are recorded as None rather than raised: flat or
    monotone series are expected outcomes at strong noise.
    """

    j1: Optional[int]
    p1: Optional[float]
    j2: Optional[int]
    p2: Optional[float]
    window: int = 5
    prominence_frac: float = 0.1

    @property
    def complete(self) -> bool:
        return self.j1 is not None and self.j2 is not None


_CENTER_OFFSETS = ((-1, -1), (-1, 0), (0, -1), (0, 0))


def localization_probability(state: WavefunctionField) -> float:
    """Probability on the four nodes adjacent to the potential center."""
    h = state.m // 2
    total = 0.0
    for dp, dq in _CENTER_OFFSETS:
        total += abs(state.psi_l[h + dp, h + dq]) ** 2
        total += abs(state.psi_r[h + dp, h + dq]) ** 2
    return float(total)


def distribution_snapshot(state: WavefunctionField, j: int) -> DistributionSnapshot:
    """d_{j,p,q} = |psi_l|^2 + |psi_r|^2 per node."""
    d = np.abs(state.psi_l) ** 2 + np.abs(state.psi_r) ** 2
    return DistributionSnapshot(m=state.m, j=j, values=d)


def height_ratio(snapshot: DistributionSnapshot) -> float:
    """Peak-to-background ratio d[M/2-1, M/2-1] / d[1, 1].

    The background node is (1, 1) by definition, even though (0, 0)
    is farther from the center.
    """
    h = snapshot.m // 2
    peak = float(snapshot.values[h - 1, h - 1])
    background = float(snapshot.values[1, 1])
    if background == 0.0:
        warnings.warn("background cell d[1,1] is zero; height ratio is infinite")
        return float("inf")
    return peak / background


def smoothed(probs: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average, truncated (not padded) at the edges."""
    kernel = np.ones(window)
    num = np.convolve(probs, kernel, mode="same")
    den = np.convolve(np.ones_like(probs), kernel, mode="same")
    return num / den


def detect_peaks(
    series: TimeSeries, window: int = 5, prominence_frac: float = 0.1
) -> PeakRecord:
    """Locate the two localization peaks of a P_j series.

    Procedure: smooth with a centered moving average of `window` steps;
    collect local maxima of the smoothed curve whose prominence is at
    least prominence_frac * (smoothed max - smoothed min); snap each
    candidate to the raw argmax within +-window of its smoothed
    location (ties resolved to the earliest step). j1 is the earliest
    qualifying maximum with j > 0; j2 is the qualifying maximum with
    the largest raw P among those with j > 2*j1 (earliest on equal P).
    Heights are raw series values.
    """
    probs = series.probs
    if window < 1 or window > probs.size:
        raise ConfigError(f"smoothing window {window} invalid for series of length {probs.size}")
    smooth = smoothed(probs, window)
    prominence = prominence_frac * (float(smooth.max()) - float(smooth.min()))
    idx, _ = find_peaks(smooth, prominence=max(prominence, 0.0))

    refined: list[int] = []
    for i in idx:
        lo = max(int(i) - window, 0)
        hi = min(int(i) + window + 1, probs.size)
        j = lo + int(np.argmax(probs[lo:hi]))
        if j not in refined:
            refined.append(j)

    j1 = next((j for j in refined if j > 0), None)
    j2 = None
    if j1 is not None:
        late = [j for j in refined if j > 2 * j1]
        if late:
            best = max(probs[j] for j in late)
            j2 = next(j for j in late if probs[j] == best)
    return PeakRecord(
        j1=j1,
        p1=float(probs[j1]) if j1 is not None else None,
        j2=j2,
        p2=float(probs[j2]) if j2 is not None else None,
        window=window,
        prominence_frac=prominence_frac,
    )
