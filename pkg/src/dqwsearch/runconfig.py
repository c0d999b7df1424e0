"""Text run configuration: `key: value` lines.

Blank lines and lines starting with # are ignored. Unknown keys are
rejected with the offending line number. emit_config materializes all
defaults, and parse_config(emit_config(cfg)) reproduces cfg exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .errors import ConfigError
from .experiments import ExperimentPlan, SnapshotTime
from .lattice import LatticeConfig
from .potential import NOISE_KINDS, NoiseSpec

DEFAULT_SEED = 12345
# ensemble sizes used throughout: 50 spatial, 10 spatiotemporal realizations
DEFAULT_REALIZATIONS = {"none": 1, "spatial": 50, "spatiotemporal": 10}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration (every field materialized)."""

    grid_size: int
    steps: Optional[int] = None  # None = "auto"
    charge_q: float = 0.9
    charge_e: float = -1.0
    mass_mu: float = 0.0
    noise_kind: str = "none"
    noise_ratio: float = 0.0
    realizations: Optional[int] = None  # None = kind-dependent default
    seed: int = DEFAULT_SEED
    output_dir: str = "out"
    snapshots: tuple[SnapshotTime, ...] = ()

    def __post_init__(self):
        if self.grid_size % 2 != 0 or self.grid_size < 2:
            raise ConfigError("grid_size must be even and >= 2")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be a positive integer or 'auto'")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError(f"noise_kind must be one of {NOISE_KINDS}")
        if self.noise_ratio < 0:
            raise ConfigError("noise_ratio must be non-negative")
        if self.realizations is not None and self.realizations < 1:
            raise ConfigError("realizations must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")

    @property
    def resolved_realizations(self) -> int:
        if self.realizations is not None:
            return self.realizations
        return DEFAULT_REALIZATIONS[self.noise_kind]

    def lattice(self) -> LatticeConfig:
        return LatticeConfig(
            m=self.grid_size, e=self.charge_e, q=self.charge_q, mu=self.mass_mu
        )

    def noise(self) -> NoiseSpec:
        return NoiseSpec(
            kind=self.noise_kind,
            r=self.noise_ratio,
            master_seed=self.seed,
            realizations=self.resolved_realizations,
        )

    def plan(self, grid_sizes: Optional[tuple[int, ...]] = None) -> ExperimentPlan:
        return ExperimentPlan(
            grid_sizes=grid_sizes or (self.grid_size,),
            steps=self.steps,
            noise=self.noise(),
            snapshots=self.snapshots,
            charge_q=self.charge_q,
            charge_e=self.charge_e,
            mass_mu=self.mass_mu,
        )


def _parse_int(text: str, key: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"line {line}: key {key!r} needs an integer, got {text!r}")


def _parse_float(text: str, key: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"line {line}: key {key!r} needs a number, got {text!r}")


def _parse_snapshots(text: str, line: int) -> tuple[SnapshotTime, ...]:
    out: list[SnapshotTime] = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if piece in ("j1", "j2"):
            out.append(piece)
        else:
            try:
                out.append(int(piece))
            except ValueError:
                raise ConfigError(
                    f"line {line}: snapshots entries must be integers, 'j1' or 'j2'; got {piece!r}"
                )
    return tuple(out)


_KEYS = (
    "grid_size",
    "steps",
    "charge_q",
    "charge_e",
    "mass_mu",
    "noise_kind",
    "noise_ratio",
    "realizations",
    "seed",
    "output_dir",
    "snapshots",
)


def parse_config(text: str) -> RunConfig:
    """Parse the key-value format; every diagnostic carries a line number."""
    raw: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key: value', got {stripped!r}")
        key, _, value = stripped.partition(":")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)

        if key == "grid_size":
            raw[key] = _parse_int(value, key, lineno)
        elif key == "steps":
            raw[key] = None if value == "auto" else _parse_int(value, key, lineno)
        elif key in ("charge_q", "charge_e", "mass_mu", "noise_ratio"):
            raw[key] = _parse_float(value, key, lineno)
        elif key == "noise_kind":
            raw[key] = value
        elif key in ("realizations", "seed"):
            raw[key] = _parse_int(value, key, lineno)
        elif key == "output_dir":
            raw[key] = value
        elif key == "snapshots":
            raw[key] = _parse_snapshots(value, lineno)

    if "grid_size" not in raw:
        raise ConfigError("missing required key 'grid_size'")
    try:
        return RunConfig(**raw)  # type: ignore[arg-type]
    except ConfigError:
        raise
    except TypeError as exc:  # pragma: no cover - defensive
        raise ConfigError(str(exc))


def emit_config(config: RunConfig) -> str:
    """Canonical text form with every default materialized."""
    lines = [
        f"grid_size: {config.grid_size}",
        f"steps: {'auto' if config.steps is None else config.steps}",
        f"charge_q: {config.charge_q!r}",
        f"charge_e: {config.charge_e!r}",
        f"mass_mu: {config.mass_mu!r}",
        f"noise_kind: {config.noise_kind}",
        f"noise_ratio: {config.noise_ratio!r}",
        f"realizations: {config.resolved_realizations}",
        f"seed: {config.seed}",
        f"output_dir: {config.output_dir}",
        "snapshots: " + ", ".join(str(t) for t in config.snapshots),
    ]
    return "\n".join(lines).rstrip() + "\n"
