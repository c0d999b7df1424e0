#!/usr/bin/env python3
"""Step-throughput benchmark: numba kernels against the numpy fallback.

Times `evolve_static` (the fused per-step update plus the center-node
probability read-out) and reports million node-steps per second, the
figure that decides how large a grid is practical. Invoke as

    python3 benchmarks/step_benchmark.py [--sizes 200,500] [--steps 200]
"""

import argparse
import time

import numpy as np

from dqwsearch import CoinAngles, LatticeConfig, build_coulomb_table, init_uniform
from dqwsearch.backend import HAS_NUMBA, kernels


def time_backend(backend: str, m: int, n_steps: int) -> float:
    cfg = LatticeConfig(m=m)
    table = build_coulomb_table(cfg)
    angles = CoinAngles.from_mass(cfg.mu)
    factors = np.exp(-1j * table.values)
    cp, sp = np.cos(angles.theta_plus), np.sin(angles.theta_plus)
    cm, sm = np.cos(angles.theta_minus), np.sin(angles.theta_minus)
    kern = kernels(backend)
    state = init_uniform(cfg)
    # warm-up run keeps jit compilation out of the timed region
    kern.evolve_static(
        state.psi_l.copy(), state.psi_r.copy(), factors, cp, sp, cm, sm, 3, np.empty(4)
    )
    probs = np.empty(n_steps + 1)
    start = time.perf_counter()
    kern.evolve_static(state.psi_l, state.psi_r, factors, cp, sp, cm, sm, n_steps, probs)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500", help="comma-separated even grid sizes")
    parser.add_argument("--steps", type=int, default=200, help="steps per timed run")
    args = parser.parse_args()
    sizes = [int(piece) for piece in args.sizes.split(",") if piece.strip()]

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if not HAS_NUMBA:
        print("numba is not installed; timing the numpy fallback only")
    print(f"{'M':>6}  {'backend':>8}  {'seconds':>9}  {'Mnode-steps/s':>13}")
    for m in sizes:
        for backend in backends:
            elapsed = time_backend(backend, m, args.steps)
            rate = m * m * args.steps / elapsed / 1e6
            print(f"{m:>6}  {backend:>8}  {elapsed:>9.3f}  {rate:>13.1f}")


if __name__ == "__main__":
    main()
