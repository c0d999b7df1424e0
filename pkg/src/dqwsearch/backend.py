"""Kernel backend selection.

The hot loop (one M x M stencil per step, repeated O(M) steps per
realization) runs either as a numba-compiled kernel or as a pure-numpy
staged fallback. Selection order:

  1. explicit `requested` argument,
  2. the DQW_BACKEND environment variable (auto | numba | numpy),
  3. auto: numba if importable, else numpy.

Both backends implement the same module-level functions (fused_step,
evolve_static) and agree to a few ulps; within one backend results are
bit-stable regardless of thread count.
"""

from __future__ import annotations

import os

from .errors import ConfigError
from . import _kernels_numpy

try:
    from . import _kernels_numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _kernels_numba = None
    HAS_NUMBA = False

_CHOICES = ("auto", "numba", "numpy")


def active_backend(requested: str | None = None) -> str:
    """Resolve which backend will run, without importing anything new."""
    choice = requested or os.environ.get("DQW_BACKEND", "auto")
    if choice not in _CHOICES:
        raise ConfigError(f"backend must be one of {_CHOICES}, got {choice!r}")
    if choice == "numba" and not HAS_NUMBA:
        raise ConfigError("backend 'numba' requested but numba is not importable")
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    return choice


def kernels(requested: str | None = None):
    """Return the kernel module for the resolved backend."""
    return _kernels_numba if active_backend(requested) == "numba" else _kernels_numpy
