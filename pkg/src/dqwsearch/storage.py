"""Persistent outputs: CSV series, distribution grids (text or binary),
scan summaries, and JSON metadata sidecars.

Every data file <name>.<ext> gets a sidecar <name>.meta.json recording
what produced it (config echo, seed, detection parameters, package
version). Sidecars are deterministic: sorted keys, no timestamps.

Binary grid layout (little-endian): 16-byte header = magic b"DQW1",
uint32 grid size M, uint64 step j; then M*M float64 values row-major.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .errors import ConfigError
from .experiments import ScalingFit, ScanResult
from .observables import DistributionSnapshot, TimeSeries

MAGIC = b"DQW1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def _write_sidecar(path: Path, payload: dict[str, Any]) -> None:
    payload = dict(payload)
    payload["artifact"] = "dqwsearch"
    payload["version"] = __version__
    text = json.dumps(payload, sort_keys=True, indent=1)
    _sidecar_path(path).write_text(text + "\n", encoding="utf-8")


def read_sidecar(path: Path) -> dict[str, Any]:
    side = _sidecar_path(Path(path))
    if not side.exists():
        return {}
    return json.loads(side.read_text(encoding="utf-8"))


def write_series(series: TimeSeries, path: str | Path) -> None:
    """CSV with header `j,P`, one row per step, 17 significant digits."""
    path = Path(path)
    lines = ["j,P"]
    for j, p in enumerate(series.probs):
        lines.append(f"{j},{_fmt(p)}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
    _write_sidecar(path, {"format": "series-csv-v1", "m": series.m, "meta": series.meta})


def read_series(path: str | Path) -> TimeSeries:
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0] != "j,P":
        raise ConfigError(f"{path}: not a series file (missing 'j,P' header)")
    probs = np.empty(len(lines) - 1, dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        j_text, _, p_text = line.partition(",")
        if int(j_text) != i:
            raise ConfigError(f"{path}: non-contiguous step index at row {i + 1}")
        probs[i] = float(p_text)
    side = read_sidecar(path)
    return TimeSeries(m=int(side.get("m", 0)) or probs.size, probs=probs,
                      meta=side.get("meta", {}))


def write_distribution(
    snapshot: DistributionSnapshot,
    path: str | Path,
    fmt: str = "csv",
    meta: Optional[dict[str, Any]] = None,
) -> None:
    """Spatial grid as `p,q,d` CSV (row-major) or the dense binary layout."""
    path = Path(path)
    if fmt == "csv":
        lines = ["p,q,d"]
        vals = snapshot.values
        for p in range(snapshot.m):
            row = vals[p]
            for q in range(snapshot.m):
                lines.append(f"{p},{q},{_fmt(row[q])}")
        _atomic_write_text(path, "\n".join(lines) + "\n")
    elif fmt == "binary":
        header = MAGIC + np.uint32(snapshot.m).tobytes() + np.uint64(snapshot.j).tobytes()
        body = np.ascontiguousarray(snapshot.values, dtype="<f8").tobytes()
        path.write_bytes(header + body)
    else:
        raise ConfigError(f"distribution format must be csv or binary, got {fmt!r}")
    _write_sidecar(
        path,
        {
            "format": f"distribution-{fmt}-v1",
            "m": snapshot.m,
            "j": snapshot.j,
            "meta": meta or {},
        },
    )


def read_distribution(path: str | Path) -> DistributionSnapshot:
    """Read either distribution format; binary is sniffed by magic."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] == MAGIC:
        m = int(np.frombuffer(blob, dtype="<u4", count=1, offset=4)[0])
        j = int(np.frombuffer(blob, dtype="<u8", count=1, offset=8)[0])
        values = np.frombuffer(blob, dtype="<f8", offset=16, count=m * m).reshape(m, m)
        return DistributionSnapshot(m=m, j=j, values=values.copy())
    lines = blob.decode("utf-8").splitlines()
    if not lines or lines[0] != "p,q,d":
        raise ConfigError(f"{path}: neither binary magic nor 'p,q,d' header found")
    n_rows = len(lines) - 1
    m = math.isqrt(n_rows)
    if m * m != n_rows:
        raise ConfigError(f"{path}: {n_rows} rows is not a square grid")
    values = np.empty((m, m), dtype=np.float64)
    for line in lines[1:]:
        p_text, q_text, d_text = line.split(",")
        values[int(p_text), int(q_text)] = float(d_text)
    side = read_sidecar(path)
    return DistributionSnapshot(m=m, j=int(side.get("j", 0)), values=values)


def write_scan(result: ScanResult, path: str | Path, meta: Optional[dict[str, Any]] = None) -> None:
    """Peak summary CSV `m,j1,P1,j2,P2` (empty cells for missing peaks);
    the fit, collapse statistics and flags go to the sidecar."""
    path = Path(path)
    lines = ["m,j1,P1,j2,P2"]
    for m, rec in result.records:
        j1 = "" if rec.j1 is None else str(rec.j1)
        p1 = "" if rec.p1 is None else _fmt(rec.p1)
        j2 = "" if rec.j2 is None else str(rec.j2)
        p2 = "" if rec.p2 is None else _fmt(rec.p2)
        lines.append(f"{m},{j1},{p1},{j2},{p2}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
    fit = None
    if result.fit is not None:
        fit = {
            "slope": result.fit.slope,
            "intercept": result.fit.intercept,
            "r_squared": result.fit.r_squared,
            "points": [list(p) for p in result.fit.points],
        }
    detection = {}
    if result.records:
        rec = result.records[0][1]
        detection = {"window": rec.window, "prominence_frac": rec.prominence_frac}
    _write_sidecar(
        path,
        {
            "format": "scan-csv-v1",
            "fit": fit,
            "p1_times_n": {str(k): v for k, v in result.p1_times_n.items()},
            "p2_times_lnn": {str(k): v for k, v in result.p2_times_lnn.items()},
            "flagged": list(result.flagged),
            "detection": detection,
            "meta": meta or {},
        },
    )


def read_scan(path: str | Path) -> tuple[list[dict[str, Any]], Optional[ScalingFit]]:
    """Read back a scan summary for plotting: per-size peak rows + fit."""
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0] != "m,j1,P1,j2,P2":
        raise ConfigError(f"{path}: not a scan summary (missing header)")
    rows = []
    for line in lines[1:]:
        m, j1, p1, j2, p2 = line.split(",")
        rows.append(
            {
                "m": int(m),
                "j1": int(j1) if j1 else None,
                "p1": float(p1) if p1 else None,
                "j2": int(j2) if j2 else None,
                "p2": float(p2) if p2 else None,
            }
        )
    side = read_sidecar(path)
    fit = None
    if side.get("fit"):
        f = side["fit"]
        fit = ScalingFit(
            slope=f["slope"],
            intercept=f["intercept"],
            r_squared=f["r_squared"],
            points=tuple((int(m), int(j)) for m, j in f["points"]),
        )
    return rows, fit


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    tmp.replace(path)
