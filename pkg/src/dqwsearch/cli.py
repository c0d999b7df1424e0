"""Command-line front end.

Subcommands: run (one realization), ensemble (noise average), scan
(peaks vs grid size), snapshot (spatial distributions), plot (SVG from
saved artifacts). Shared flags: --config, --seed, --threads, --out.
Exit codes: 0 success, 2 configuration error, 3 runtime error.

The CLI itself is single-threaded; it hands --threads (or the
DQW_THREADS environment variable) down to the experiment layer and
performs all writes serially, so identical config and seed produce
byte-identical files at any thread count.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .experiments import ensemble_snapshots, resolve_snapshot_times, run_ensemble, run_time_series, scaling_scan
from .observables import PeakRecord, detect_peaks
from .runconfig import RunConfig, emit_config, parse_config
from .storage import read_distribution, read_scan, read_series, write_distribution, write_scan, write_series
from .svgfig import RESCALE_MODES, emit_plot

PLOT_KINDS = ("series", "rescaled_series", "scaling", "heatmap")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file (key: value lines)")
    common.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads (default: DQW_THREADS or auto)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config output_dir)")

    parser = argparse.ArgumentParser(
        prog="dqwsearch",
        description="Spatial search by a 2D electric discrete-time quantum walk.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="single-realization time series")
    sub.add_parser("ensemble", parents=[common], help="noise-averaged time series")

    p_scan = sub.add_parser("scan", parents=[common], help="peak positions and heights across grid sizes")
    p_scan.add_argument("--grid-sizes", metavar="M1,M2,...", help="comma-separated even grid sizes")

    p_snap = sub.add_parser("snapshot", parents=[common], help="spatial distributions at the configured steps")
    p_snap.add_argument("--format", choices=("csv", "binary"), default="csv", help="distribution file format")

    p_plot = sub.add_parser("plot", parents=[common], help="render saved artifacts to SVG")
    p_plot.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p_plot.add_argument("--rescale", choices=RESCALE_MODES, default="none", help="series multiplier for rescaled_series")
    p_plot.add_argument("inputs", nargs="+", metavar="FILE", help="previously written data files")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        config = parse_config(text)
    else:
        config = RunConfig(grid_size=200)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        config = RunConfig(**{**_as_dict(config), "seed": args.seed})
    if args.out is not None:
        config = RunConfig(**{**_as_dict(config), "output_dir": args.out})
    return config


def _as_dict(config: RunConfig) -> dict:
    return {
        "grid_size": config.grid_size,
        "steps": config.steps,
        "charge_q": config.charge_q,
        "charge_e": config.charge_e,
        "mass_mu": config.mass_mu,
        "noise_kind": config.noise_kind,
        "noise_ratio": config.noise_ratio,
        "realizations": config.realizations,
        "seed": config.seed,
        "output_dir": config.output_dir,
        "snapshots": config.snapshots,
    }


def _threads(args: argparse.Namespace) -> Optional[int]:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.threads
    env = os.environ.get("DQW_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"DQW_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise ConfigError("DQW_THREADS must be >= 1")
        return n
    return None


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _peak_line(m: int, record: PeakRecord) -> str:
    def cell(v, fmt="{}"):
        return "-" if v is None else fmt.format(v)

    return (
        f"m={m} j1={cell(record.j1)} P1={cell(record.p1, '{:.6g}')} "
        f"j2={cell(record.j2)} P2={cell(record.p2, '{:.6g}')}"
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    plan = config.plan()
    m = config.grid_size
    series = run_time_series(plan.lattice(m), plan.noise, 0, plan.horizon(m))
    out = _out_dir(config)
    path = out / f"series_m{m}.csv"
    series.meta["config"] = emit_config(config)
    write_series(series, path)
    print(_peak_line(m, detect_peaks(series)))
    print(f"wrote {path}")
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    config = _load_config(args)
    plan = config.plan()
    m = config.grid_size
    series = run_ensemble(plan.lattice(m), plan.noise, plan.horizon(m), threads=_threads(args))
    out = _out_dir(config)
    path = out / f"ensemble_m{m}_{plan.noise.kind}_r{plan.noise.r:g}.csv"
    series.meta["config"] = emit_config(config)
    write_series(series, path)
    print(_peak_line(m, detect_peaks(series)))
    print(f"wrote {path}")
    return 0


def _parse_grid_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(piece) for piece in text.split(",") if piece.strip())
    except ValueError:
        raise ConfigError(f"--grid-sizes needs comma-separated integers, got {text!r}")
    if not sizes:
        raise ConfigError("--grid-sizes is empty")
    return sizes


def _cmd_scan(args: argparse.Namespace) -> int:
    config = _load_config(args)
    sizes = _parse_grid_sizes(args.grid_sizes) if args.grid_sizes else (config.grid_size,)
    plan = config.plan(grid_sizes=sizes)
    result = scaling_scan(plan, threads=_threads(args))
    out = _out_dir(config)
    csv_path = out / "peaks.csv"
    write_scan(result, csv_path, meta={"config": emit_config(config), "grid_sizes": list(sizes)})
    rows, fit = read_scan(csv_path)
    svg_path = out / "scaling.svg"
    emit_plot("scaling", (rows, fit), svg_path)
    for m, record in result.records:
        print(_peak_line(m, record))
    if result.fit is not None:
        print(
            f"fit j2 = {result.fit.slope:.6g}*M + {result.fit.intercept:.6g} "
            f"(r^2 = {result.fit.r_squared:.4f})"
        )
    for m in result.flagged:
        print(f"m={m}: no second peak detected", file=sys.stderr)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    return 0


def _cmd_snapshot(args: argparse.Namespace) -> int:
    config = _load_config(args)
    plan = config.plan()
    m = config.grid_size
    lattice = plan.lattice(m)
    wanted = config.snapshots or ("j1", "j2")
    times = resolve_snapshot_times(lattice, wanted, plan.horizon(m))
    snaps = ensemble_snapshots(lattice, plan.noise, times, threads=_threads(args))
    out = _out_dir(config)
    ext = "csv" if args.format == "csv" else "bin"
    for snap in snaps:
        path = out / f"dist_m{m}_j{snap.j}.{ext}"
        write_distribution(snap, path, fmt=args.format, meta={"config": emit_config(config)})
        print(f"wrote {path}")
    return 0


def _cmd_plot(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    path = out / f"{args.kind}.svg"
    if args.kind in ("series", "rescaled_series"):
        inputs = [read_series(p) for p in args.inputs]
        rescale = args.rescale if args.kind == "rescaled_series" else "none"
        if args.kind == "rescaled_series" and rescale == "none":
            raise ConfigError("rescaled_series needs --rescale N or logN")
        emit_plot(args.kind, inputs, path, rescale=rescale)
    elif args.kind == "scaling":
        if len(args.inputs) != 1:
            raise ConfigError("scaling plot takes exactly one peaks.csv input")
        rows, fit = read_scan(args.inputs[0])
        emit_plot("scaling", (rows, fit), path)
    else:
        snaps = [read_distribution(p) for p in args.inputs]
        emit_plot("heatmap", snaps, path)
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "ensemble": _cmd_ensemble,
    "scan": _cmd_scan,
    "snapshot": _cmd_snapshot,
    "plot": _cmd_plot,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
