"""Deterministic SVG figures: identical inputs give byte-identical files.

No plotting library is used: numbers are formatted through one code
path, colors come from fixed tables, and nothing depends on time,
locale, or dict iteration order. Four figure kinds are supported:
series (P_j curves), rescaled_series (P_j times N or ln N), scaling
(peak times vs grid size with the fit line), and heatmap (distribution
grids, linear color scale normalized to the figure-wide maximum).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .experiments import ScalingFit
from .observables import DistributionSnapshot, TimeSeries

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 16, 20, 48
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
# six-stop dark-to-bright ramp for heatmaps
RAMP = ((68, 1, 84), (65, 68, 135), (42, 120, 142), (34, 168, 132), (122, 209, 81), (253, 231, 37))
RAMP_LEVELS = 64

RESCALE_MODES = ("none", "N", "logN")


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".6g")


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + step * 1e-9:
        out.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return out


class _Canvas:
    """Accumulates SVG elements for one x/y data window."""

    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        if y_hi <= y_lo:
            y_hi = y_lo + 1.0
        self.x_lo, self.x_hi, self.y_lo, self.y_hi = x_lo, x_hi, y_lo, y_hi
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN_L - MARGIN_R
        return MARGIN_L + (x - self.x_lo) / (self.x_hi - self.x_lo) * span

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN_T - MARGIN_B
        return HEIGHT - MARGIN_B - (y - self.y_lo) / (self.y_hi - self.y_lo) * span

    def axes(self, xlabel: str, ylabel: str) -> None:
        x0, x1 = MARGIN_L, WIDTH - MARGIN_R
        y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            'fill="none" stroke="#333333" stroke-width="1"/>'
        )
        for t in _ticks(self.x_lo, self.x_hi):
            px = self.px(t)
            self.parts.append(
                f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" '
                'stroke="#333333" stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{px:.2f}" y="{y0 + 18}" font-family="sans-serif" '
                f'font-size="11" text-anchor="middle">{_num(t)}</text>'
            )
        for t in _ticks(self.y_lo, self.y_hi):
            py = self.py(t)
            self.parts.append(
                f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" '
                'stroke="#333333" stroke-width="1"/>'
            )
            self.parts.append(
                f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-family="sans-serif" '
                f'font-size="11" text-anchor="end">{_num(t)}</text>'
            )
        self.parts.append(
            f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 10}" font-family="sans-serif" '
            f'font-size="13" text-anchor="middle">{xlabel}</text>'
        )
        self.parts.append(
            f'<text x="16" y="{(y0 + y1) / 2:.2f}" font-family="sans-serif" font-size="13" '
            f'text-anchor="middle" transform="rotate(-90 16 {(y0 + y1) / 2:.2f})">{ylabel}</text>'
        )

    def polyline(self, xs, ys, color: str) -> None:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )

    def markers(self, xs, ys, color: str) -> None:
        for x, y in zip(xs, ys):
            self.parts.append(
                f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="3.5" '
                f'fill="{color}" stroke="none"/>'
            )

    def legend(self, labels: Sequence[tuple[str, str]]) -> None:
        x = WIDTH - MARGIN_R - 150
        y = MARGIN_T + 14
        for label, color in labels:
            self.parts.append(
                f'<line x1="{x}" y1="{y - 4}" x2="{x + 22}" y2="{y - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            self.parts.append(
                f'<text x="{x + 28}" y="{y}" font-family="sans-serif" font-size="12">{label}</text>'
            )
            y += 16


def _document(parts: Sequence[str], width: int = WIDTH, height: int = HEIGHT) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>'
    )
    return head + "\n" + "\n".join(parts) + "\n</svg>\n"


def _rescale_factor(mode: str, m: int) -> tuple[float, str]:
    if mode == "none":
        return 1.0, "P"
    if mode == "N":
        return float(m * m), "P x N"
    if mode == "logN":
        return math.log(m * m), "P x ln N"
    raise ConfigError(f"rescale must be one of {RESCALE_MODES}, got {mode!r}")


def _series_svg(series_list: Sequence[TimeSeries], rescale: str) -> str:
    if not series_list:
        raise ConfigError("series plot needs at least one input series")
    curves = []
    for s in series_list:
        if rescale != "none" and s.m <= 0:
            raise ConfigError("rescaled plot needs the grid size; sidecar missing 'm'")
        factor, ylabel = _rescale_factor(rescale, max(s.m, 1))
        curves.append((s.m, np.arange(s.probs.size), s.probs * factor))
    _, ylabel = _rescale_factor(rescale, max(series_list[0].m, 1))
    x_hi = max(float(c[1][-1]) for c in curves)
    y_hi = max(float(c[2].max()) for c in curves)
    canvas = _Canvas(0.0, x_hi, 0.0, y_hi * 1.05)
    canvas.axes("j", ylabel)
    labels = []
    for i, (m, xs, ys) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        canvas.polyline(xs, ys, color)
        labels.append((f"M = {m}" if m > 1 else f"series {i}", color))
    canvas.legend(labels)
    return _document(canvas.parts)


def _scaling_svg(rows: Sequence[dict], fit: Optional[ScalingFit]) -> str:
    if not rows:
        raise ConfigError("scaling plot needs at least one scan row")
    ms = [r["m"] for r in rows]
    j1s = [(r["m"], r["j1"]) for r in rows if r.get("j1") is not None]
    j2s = [(r["m"], r["j2"]) for r in rows if r.get("j2") is not None]
    all_j = [j for _, j in j1s + j2s] or [1]
    canvas = _Canvas(0.0, max(ms) * 1.05, 0.0, max(all_j) * 1.1)
    canvas.axes("M", "peak step")
    if fit is not None:
        x0, x1 = 0.0, max(ms) * 1.05
        y0 = fit.intercept
        y1 = fit.slope * x1 + fit.intercept
        canvas.parts.append(
            f'<line x1="{canvas.px(x0):.2f}" y1="{canvas.py(max(y0, 0.0)):.2f}" '
            f'x2="{canvas.px(x1):.2f}" y2="{canvas.py(max(y1, 0.0)):.2f}" '
            'stroke="#888888" stroke-width="1" stroke-dasharray="6 3"/>'
        )
    canvas.markers([m for m, _ in j1s], [j for _, j in j1s], PALETTE[2])
    canvas.markers([m for m, _ in j2s], [j for _, j in j2s], PALETTE[0])
    canvas.legend([("first peak", PALETTE[2]), ("second peak", PALETTE[0])])
    return _document(canvas.parts)


def _ramp_color(level: int) -> str:
    t = level / RAMP_LEVELS
    pos = t * (len(RAMP) - 1)
    i = min(int(pos), len(RAMP) - 2)
    frac = pos - i
    r = round(RAMP[i][0] + (RAMP[i + 1][0] - RAMP[i][0]) * frac)
    g = round(RAMP[i][1] + (RAMP[i + 1][1] - RAMP[i][1]) * frac)
    b = round(RAMP[i][2] + (RAMP[i + 1][2] - RAMP[i][2]) * frac)
    return f"#{r:02x}{g:02x}{b:02x}"


def _heatmap_svg(snapshots: Sequence[DistributionSnapshot]) -> str:
    if not snapshots:
        raise ConfigError("heatmap needs at least one distribution")
    m = snapshots[0].m
    if any(s.m != m for s in snapshots):
        raise ConfigError("mixed grid sizes in a heatmap")
    vmax = max(float(s.values.max()) for s in snapshots)
    if vmax <= 0:
        vmax = 1.0
    panel = 320
    pad = 24
    width = pad + len(snapshots) * (panel + pad)
    height = panel + 2 * pad + 18
    parts = []
    cell = panel / m
    for idx, snap in enumerate(snapshots):
        ox = pad + idx * (panel + pad)
        oy = pad
        levels = np.minimum(
            (snap.values / vmax * RAMP_LEVELS).astype(np.int64), RAMP_LEVELS
        )
        for p in range(m):
            row = levels[p]
            q = 0
            while q < m:
                q_end = q
                lvl = row[q]
                while q_end + 1 < m and row[q_end + 1] == lvl:
                    q_end += 1
                # run-length merged cells keep the file small
                x = ox + q * cell
                y = oy + p * cell
                w = (q_end - q + 1) * cell
                parts.append(
                    f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{cell:.2f}" '
                    f'fill="{_ramp_color(int(lvl))}"/>'
                )
                q = q_end + 1
        parts.append(
            f'<text x="{ox + panel / 2:.2f}" y="{oy + panel + 16}" font-family="sans-serif" '
            f'font-size="12" text-anchor="middle">M = {m}, j = {snap.j}</text>'
        )
    return _document(parts, width=width, height=height)


def emit_plot(kind: str, inputs, path: str | Path, rescale: str = "none") -> None:
    """Render one figure to `path`; see module docstring for kinds."""
    if kind == "series":
        text = _series_svg(inputs, "none")
    elif kind == "rescaled_series":
        if rescale == "none":
            raise ConfigError("rescaled_series needs --rescale N or logN")
        text = _series_svg(inputs, rescale)
    elif kind == "scaling":
        rows, fit = inputs
        text = _scaling_svg(rows, fit)
    elif kind == "heatmap":
        text = _heatmap_svg(inputs)
    else:
        raise ConfigError(
            f"plot kind must be series, rescaled_series, scaling or heatmap; got {kind!r}"
        )
    Path(path).write_bytes(text.encode("utf-8"))
