"""Spatial search by a 2D electric discrete-time quantum walk.

A two-component walker on a periodic M x M grid evolves under
alternating coin rotations, coin-conditioned shifts, and a diagonal
phase built from the Coulomb potential of a point charge placed
between the four central nodes. The probability on those four nodes
shows two localization peaks: an early one at a size-independent step
and a later one at a step growing linearly with M. This package
simulates the walk, detects and tracks both peaks, runs seeded noise
ensembles on the oracle phase, and writes deterministic CSV/SVG
artifacts.
"""

__version__ = "0.1.0"

from .backend import HAS_NUMBA, active_backend, kernels
from .errors import ConfigError, PeakNotFoundError
from .evolution import CoinAngles, apply_phase, coin_rotate, shift_1, shift_2, step
from .experiments import (
    ExperimentPlan,
    ScalingFit,
    ScanResult,
    auto_jmax,
    ensemble_snapshots,
    fit_second_peak,
    resolve_snapshot_times,
    run_ensemble,
    run_time_series,
    scaling_scan,
)
from .lattice import LatticeConfig, WavefunctionField, init_uniform, norm_squared
from .observables import (
    DistributionSnapshot,
    PeakRecord,
    TimeSeries,
    detect_peaks,
    distribution_snapshot,
    height_ratio,
    localization_probability,
    smoothed,
)
from .potential import (
    NOISE_KINDS,
    NoiseSpec,
    PhaseTable,
    build_coulomb_table,
    overlay_spatial_noise,
    sample_spatiotemporal_noise,
)
from .runconfig import DEFAULT_SEED, RunConfig, emit_config, parse_config
from .storage import (
    read_distribution,
    read_scan,
    read_series,
    write_distribution,
    write_scan,
    write_series,
)
from .svgfig import emit_plot

__all__ = [
    "__version__",
    "HAS_NUMBA",
    "active_backend",
    "kernels",
    "ConfigError",
    "PeakNotFoundError",
    "CoinAngles",
    "apply_phase",
    "coin_rotate",
    "shift_1",
    "shift_2",
    "step",
    "ExperimentPlan",
    "ScalingFit",
    "ScanResult",
    "auto_jmax",
    "ensemble_snapshots",
    "fit_second_peak",
    "resolve_snapshot_times",
    "run_ensemble",
    "run_time_series",
    "scaling_scan",
    "LatticeConfig",
    "WavefunctionField",
    "init_uniform",
    "norm_squared",
    "DistributionSnapshot",
    "PeakRecord",
    "TimeSeries",
    "detect_peaks",
    "distribution_snapshot",
    "height_ratio",
    "localization_probability",
    "smoothed",
    "NOISE_KINDS",
    "NoiseSpec",
    "PhaseTable",
    "build_coulomb_table",
    "overlay_spatial_noise",
    "sample_spatiotemporal_noise",
    "DEFAULT_SEED",
    "RunConfig",
    "emit_config",
    "parse_config",
    "read_distribution",
    "read_scan",
    "read_series",
    "write_distribution",
    "write_scan",
    "write_series",
    "emit_plot",
]
