"""Whole-pipeline acceptance gate.

One test per published behavior, each checked at its stated tolerance,
so `pytest -v` prints a single pass/fail line per criterion. Assertion
messages carry the measured numbers. Criteria the implementation does
not meet fail here as-is: the checks are not loosened, skipped, or
marked as expected failures. The README lists which ones fall short
and what was measured instead.

Everything runs at desk scale (M <= 500) on the default seed. The
module-scoped scan fixture is built once by the first test that needs
it and covers the noiseless sweep used by several criteria.
"""

import math

import numpy as np
import pytest

from dqwsearch import (
    CoinAngles,
    ExperimentPlan,
    LatticeConfig,
    NoiseSpec,
    PhaseTable,
    build_coulomb_table,
    detect_peaks,
    ensemble_snapshots,
    height_ratio,
    init_uniform,
    kernels,
    run_ensemble,
    run_time_series,
    scaling_scan,
    step,
)
from dqwsearch.cli import main

from test_evolution import dense_walk_operator
from conftest import random_state

SCAN_SIZES = (100, 150, 200, 300, 400, 500)

# reference height ratios eta at the detected peak times
ETA_NOISELESS = {(200, "j1"): 160.0, (200, "j2"): 127.0, (500, "j1"): 163.0, (500, "j2"): 242.0}
ETA_SPATIAL = {(200, "j1"): 87.0, (200, "j2"): 142.0, (500, "j1"): 115.0, (500, "j2"): 218.0}


def spread(values) -> float:
    """Relative spread (max - min) / mean."""
    values = list(values)
    return (max(values) - min(values)) / (sum(values) / len(values))


@pytest.fixture(scope="module")
def scan():
    """Noiseless peak scan over SCAN_SIZES at the automatic horizon."""
    return scaling_scan(ExperimentPlan(grid_sizes=SCAN_SIZES))


def test_01_norm_is_conserved_over_2000_steps():
    """Unitarity in practice: M=200 with the point-charge phase table,
    2000 fused steps, |norm^2 - 1| < 1e-10 at every step."""
    cfg = LatticeConfig(m=200)
    table = build_coulomb_table(cfg)
    angles = CoinAngles.from_mass(cfg.mu)
    factors = np.exp(-1j * table.values)
    cp, sp = np.cos(angles.theta_plus), np.sin(angles.theta_plus)
    cm, sm = np.cos(angles.theta_minus), np.sin(angles.theta_minus)
    kern = kernels()
    state = init_uniform(cfg)
    cur_l, cur_r = state.psi_l, state.psi_r
    nxt_l, nxt_r = np.empty_like(cur_l), np.empty_like(cur_r)
    worst = 0.0
    for _ in range(2000):
        kern.fused_step(cur_l, cur_r, factors, cp, sp, cm, sm, nxt_l, nxt_r)
        cur_l, nxt_l = nxt_l, cur_l
        cur_r, nxt_r = nxt_r, cur_r
        norm = float(np.sum(np.abs(cur_l) ** 2) + np.sum(np.abs(cur_r) ** 2))
        worst = max(worst, abs(norm - 1.0))
    assert worst < 1e-10, f"norm drift {worst:.3e} exceeds 1e-10"


def test_02_step_matches_dense_unitary_matrix():
    """The assembled 2N x 2N one-step matrix at M=4 is unitary to 1e-12
    and agrees with `step` on 20 random states to 1e-12."""
    cfg = LatticeConfig(m=4)
    u = dense_walk_operator(cfg)
    unitarity = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    assert unitarity < 1e-12, f"|U*U - I| = {unitarity:.3e}"

    table = build_coulomb_table(cfg)
    angles = CoinAngles.from_mass(cfg.mu)
    worst = 0.0
    for seed in range(20):
        state = random_state(4, 1000 + seed)
        vec = np.concatenate([state.psi_l.ravel(), state.psi_r.ravel()])
        stepped = step(state, table, angles)
        expected = np.concatenate([stepped.psi_l.ravel(), stepped.psi_r.ravel()])
        worst = max(worst, float(np.max(np.abs(u @ vec - expected))))
    assert worst < 1e-12, f"matrix/step mismatch {worst:.3e}"


def test_03_first_peak_sits_in_80_to_84(scan):
    """Noiseless first peak lands in [80, 84] for M in {100, 200, 400}.

    Known shortfall: at M=100 the detected first peak sits at j=90; it
    converges to 82 only for larger grids.
    """
    records = dict(scan.records)
    measured = {m: records[m].j1 for m in (100, 200, 400)}
    bad = {m: j for m, j in measured.items() if j is None or not 80 <= j <= 84}
    assert not bad, f"first peak outside [80, 84] at {bad}; all measured: {measured}"


def test_04_first_peak_height_scales_as_one_over_n(scan):
    """P_j1 * N agrees across M in {100, 200, 400} within 15%."""
    values = {m: scan.p1_times_n[m] for m in (100, 200, 400)}
    rel = spread(values.values())
    assert rel <= 0.15, f"P1*N spread {rel:.1%} exceeds 15%: {values}"


def test_05_second_peak_time_grows_linearly_with_m(scan):
    """Least-squares j2 vs M over six sizes explains the data: r^2 >= 0.98.

    Known shortfall: the detected second-peak times do not follow one
    linear branch over this size range (the late revival family hands
    over to an earlier one between M=400 and M=500), so the fit quality
    collapses.
    """
    points = [(m, rec.j2) for m, rec in scan.records]
    assert scan.fit is not None, f"no fit; detected peaks: {points}"
    assert scan.fit.r_squared >= 0.98, (
        f"r^2 = {scan.fit.r_squared:.4f} < 0.98 for j2 vs M points {points}"
    )


def test_06_second_peak_height_scales_as_inverse_log_n(scan):
    """P_j2 * ln N agrees across M in {200, 300, 400, 500} within 20%.

    Known shortfall: measured spread is far larger; the second-peak
    heights at these sizes do not collapse under a ln N factor.
    """
    values = {m: scan.p2_times_lnn[m] for m in (200, 300, 400, 500)}
    rel = spread(values.values())
    assert rel <= 0.20, f"P2*lnN spread {rel:.1%} exceeds 20%: {values}"


def _eta_at_peaks(m: int, record, noise: NoiseSpec) -> dict[str, float]:
    """Height ratios of the (ensemble) distribution at the noiseless
    peak times j1 and j2."""
    snaps = ensemble_snapshots(LatticeConfig(m=m), noise, (record.j1, record.j2))
    by_time = {snap.j: snap for snap in snaps}
    return {
        "j1": height_ratio(by_time[record.j1]),
        "j2": height_ratio(by_time[record.j2]),
    }


def test_07_noiseless_height_ratios_match_references(scan):
    """eta at (j1, j2) for M in {200, 500}, each within 10% of the
    reference values."""
    records = dict(scan.records)
    failures = []
    for m in (200, 500):
        etas = _eta_at_peaks(m, records[m], NoiseSpec())
        for which, eta in etas.items():
            target = ETA_NOISELESS[(m, which)]
            if abs(eta - target) / target > 0.10:
                failures.append(f"eta_{which}(M={m}) = {eta:.2f}, want {target} +-10%")
    assert not failures, "; ".join(failures)


def test_08_spatial_noise_height_ratios_match_references(scan):
    """Ensemble eta under spatial noise r=1/3 (50 realizations) at the
    noiseless peak times, each within 15% of the reference values.

    Known shortfall: two of the four ratios sit outside the band on
    this seed (j2 at M=200 comes out near 105 against 142, j1 at M=500
    near 85 against 115).
    """
    records = dict(scan.records)
    failures = []
    measured = {}
    for m in (200, 500):
        noise = NoiseSpec(kind="spatial", r=1.0 / 3.0, realizations=50)
        etas = _eta_at_peaks(m, records[m], noise)
        for which, eta in etas.items():
            measured[(m, which)] = round(eta, 2)
            target = ETA_SPATIAL[(m, which)]
            if abs(eta - target) / target > 0.15:
                failures.append(f"eta_{which}(M={m}) = {eta:.2f}, want {target} +-15%")
    assert not failures, "; ".join(failures) + f"; all measured: {measured}"


def test_09_spatial_noise_raises_and_delays_second_peak(scan):
    """At M=500 under spatial noise (r = 0.1 and 1/3, 50 realizations)
    the ensemble second peak is at least as high as the noiseless one
    and occurs no earlier.

    Under strong noise the first peak shrinks to a shoulder and a
    two-peak detector can mislabel the displaced second peak, so the
    second-peak height is read directly as the ensemble-curve maximum
    past twice the noiseless first-peak time.
    """
    baseline = dict(scan.records)[500]
    assert baseline.j2 == 331 and baseline.p2 == pytest.approx(
        0.0032725245080249673, rel=1e-9
    ), f"noiseless baseline moved: j2={baseline.j2}, P2={baseline.p2}"
    gate = 2 * baseline.j1  # second peak must sit beyond 2*j1
    failures = []
    for r in (0.1, 1.0 / 3.0):
        noise = NoiseSpec(kind="spatial", r=r, realizations=50)
        ens = run_ensemble(LatticeConfig(m=500), noise, 1200)
        tail = ens.probs[gate + 1 :]
        j2_noisy = gate + 1 + int(np.argmax(tail))
        p2_noisy = float(ens.probs[j2_noisy])
        if p2_noisy < baseline.p2:
            failures.append(
                f"r={r:.4g}: peak height {p2_noisy:.6g} < noiseless {baseline.p2:.6g}"
            )
        if j2_noisy < baseline.j2:
            failures.append(f"r={r:.4g}: peak at j={j2_noisy} earlier than {baseline.j2}")
    assert not failures, "; ".join(failures)


def test_10_first_peak_survives_spatiotemporal_noise(scan):
    """Spatiotemporal noise at M=200 (r = 0.25 and 0.5, 10 realizations):
    the detected first peak stays in [80, 84], and the ensemble level at
    the noiseless second-peak time decreases monotonically with r.

    Known shortfall: per-step resampled noise dephases the early peak
    completely at these ratios (the ensemble curve has no local maximum
    near j=82), so the position check fails. The monotone ordering
    holds.
    """
    baseline = dict(scan.records)[200]
    failures = []
    level = {0.0: baseline.p2}
    for r in (0.25, 0.5):
        noise = NoiseSpec(kind="spatiotemporal", r=r, realizations=10)
        ens = run_ensemble(LatticeConfig(m=200), noise, 550)
        level[r] = float(ens.probs[baseline.j2])
        j1 = detect_peaks(ens).j1
        if j1 is None or not 80 <= j1 <= 84:
            failures.append(f"r={r}: detected first peak at j={j1}, want [80, 84]")
    if not (level[0.0] > level[0.25] > level[0.5]):
        failures.append(f"levels at j={baseline.j2} not decreasing in r: {level}")
    assert not failures, "; ".join(failures) + f"; levels: {level}"


def test_11_time_only_noise_leaves_distribution_unchanged():
    """A per-step spatially constant phase offset changes no node
    probability: M=100, 200 steps, every d within 1e-12 of noiseless."""
    cfg = LatticeConfig(m=100)
    table = build_coulomb_table(cfg)
    angles = CoinAngles.from_mass(cfg.mu)
    offsets = np.random.default_rng(424242).uniform(-np.pi, np.pi, size=200)
    clean = init_uniform(cfg)
    noisy = init_uniform(cfg)
    worst = 0.0
    for c in offsets:
        clean = step(clean, table, angles)
        shifted = PhaseTable(m=cfg.m, values=table.values + c, signal_max=table.signal_max)
        noisy = step(noisy, shifted, angles)
        d_clean = np.abs(clean.psi_l) ** 2 + np.abs(clean.psi_r) ** 2
        d_noisy = np.abs(noisy.psi_l) ** 2 + np.abs(noisy.psi_r) ** 2
        worst = max(worst, float(np.max(np.abs(d_clean - d_noisy))))
    assert worst < 1e-12, f"distribution shifted by {worst:.3e}"


def test_12_zero_charge_keeps_the_walk_uniform():
    """Q=0 removes the marked nodes: P_j = 4/N for all j <= 100 at
    M in {50, 100}, within 1e-12."""
    failures = []
    for m in (50, 100):
        series = run_time_series(LatticeConfig(m=m, q=0.0), NoiseSpec(), 0, 100)
        target = 4.0 / (m * m)
        worst = float(np.max(np.abs(series.probs - target)))
        if worst >= 1e-12:
            failures.append(f"M={m}: max |P_j - 4/N| = {worst:.3e}")
    assert not failures, "; ".join(failures)


def test_13_outputs_are_identical_across_thread_counts(tmp_path):
    """Same config and seed with --threads 1 vs 4 produce byte-identical
    CSV and SVG artifacts for both scan and ensemble runs."""
    scan_cfg = tmp_path / "scan.cfg"
    scan_cfg.write_text("grid_size: 50\n", encoding="utf-8")
    ens_cfg = tmp_path / "ens.cfg"
    ens_cfg.write_text(
        "grid_size: 50\nsteps: 60\nnoise_kind: spatial\nnoise_ratio: 0.25\nrealizations: 4\n",
        encoding="utf-8",
    )
    outs = {}
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        rc = main(["scan", "--config", str(scan_cfg), "--grid-sizes", "50,60,70",
                   "--out", str(out), "--threads", threads])
        assert rc == 0
        rc = main(["ensemble", "--config", str(ens_cfg), "--out", str(out),
                   "--threads", threads])
        assert rc == 0
        outs[threads] = out
    for name in ("peaks.csv", "scaling.svg", "ensemble_m50_spatial_r0.25.csv"):
        a = (outs["1"] / name).read_bytes()
        b = (outs["4"] / name).read_bytes()
        assert a == b, f"{name} differs between thread counts"
