"""Error taxonomy shared across the package.

Two failure classes matter at the boundary: bad configuration (rejected
before any work starts, CLI exit code 2) and runtime failures during a
run (CLI exit code 3). Everything else propagates as-is.
"""


class ConfigError(ValueError):
    """Invalid configuration, malformed input, or contract violation."""


class PeakNotFoundError(RuntimeError):
    """A snapshot time was requested symbolically (j1/j2) but the peak
    does not exist in the detected series."""
