"""Acceptance criteria, one PASS/FAIL line each in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from qsc import gaussian as gc
from qsc.cli import run
from qsc.config import BoundsSettings, MonitorSettings
from qsc.eve import active_conditional_cov, holevo_ub_active, holevo_ub_passive, passive_conditional_cov, \
    solve_active_eve
from qsc.link import SystemParams, ase_moments, error_probability
from qsc.monitor import (coincidence_rate, f_estimate, f_estimator_stddev, required_measurement_time,
                         singles_rates, singles_snr_db)
from qsc.optimize import (Configuration, cvqkd_bits_per_mode, distance_sweep, optimize_operating_point,
                          tgw_bound_bits_per_mode)
from qsc.verify import coincidence_check, homodyne_check, opa_composition_check

NOMINAL = SystemParams()
SEED = 20240601


@pytest.fixture(scope="module")
def passive_sweeps():
    L = [float(x) for x in range(0, 61)]
    t0 = time.perf_counter()
    ase = distance_sweep(NOMINAL, Configuration.PASSIVE_ASE, L, max_workers=1)
    elapsed = time.perf_counter() - t0
    opa = distance_sweep(NOMINAL, Configuration.PASSIVE_OPA, [50.0], max_workers=1)
    return ase, opa, elapsed


def test_criterion_1_passive_rates(passive_sweeps, record_criterion):
    ase, opa, elapsed = passive_sweeps
    r_ase = next(r for r in ase if r.L_km == 50).best.delta_I_lb_bps
    r_opa = opa[0].best.delta_I_lb_bps
    ratio = r_ase / r_opa
    ok = 2.5e9 <= r_ase <= 4.5e9 and 3e2 <= ratio <= 3e3 and elapsed < 120
    record_criterion("1 passive rate at 50 km", ok,
                     f"ASE {r_ase / 1e9:.3f} Gbps, ASE/OPA ratio {ratio:.0f}, 0-60 km sweep {elapsed:.1f} s")
    assert ok


def test_criterion_2_active_rate(record_criterion):
    r = optimize_operating_point(NOMINAL.replace(L_km=50.0), Configuration.ACTIVE).delta_I_lb_bps
    ok = 1.4e9 <= r <= 2.6e9
    record_criterion("2 active rate at 50 km", ok, f"{r / 1e9:.3f} Gbps")
    assert ok


def _monitor_time(L):
    q = NOMINAL.replace(L_km=L)
    best = optimize_operating_point(q, Configuration.ACTIVE)
    return required_measurement_time(q.replace(N_S=best.N_S, R=best.R), 1e-3)


def test_criterion_3_monitoring_time(record_criterion):
    grid = MonitorSettings().L_grid
    T = [_monitor_time(L) for L in grid]
    T50 = T[grid.index(50.0)]
    increasing = all(b > a for a, b in zip(T, T[1:]))
    ok = 0.3 <= T50 <= 3.0 and increasing
    record_criterion("3 monitoring time", ok,
                     f"T_M(50 km) = {T50:.3f} s; strictly increasing over {grid[0]:g}-{grid[-1]:g} km: "
                     f"{increasing} (zero length excluded: no loss, no eavesdropper tap)")
    assert ok


def test_criterion_4_snr(record_criterion):
    S_A, _ = singles_rates(SystemParams(L_km=100.0).with_spdc_brightness(1e-3))
    _, S_B = singles_rates(SystemParams(N_S=0.1, L_km=100.0, kappa_B=0.1))
    a, b = singles_snr_db(S_A, 0.1), singles_snr_db(S_B, 0.1)
    ok = abs(a - 82.55) <= 0.1 and abs(b - 72.55) <= 0.1
    record_criterion("4 singles SNR", ok, f"SNR_A {a:.3f} dB, SNR_B {b:.3f} dB")
    assert ok


@pytest.fixture(scope="module")
def oracle_runs():
    t0 = time.perf_counter()
    opa = opa_composition_check(SEED, 20)
    hom = homodyne_check(SEED, 100_000)
    coin = coincidence_check(SEED, 2_000_000)
    return opa, hom, coin, time.perf_counter() - t0


def test_criterion_5_oracles(oracle_runs, record_criterion):
    opa, hom, coin, elapsed = oracle_runs
    ok = (opa["status"] == "pass" and hom["status"] == "pass" and len(hom["points"]) == 5
          and abs(coin["C_AB"]["z"]) <= 3 and abs(coin["var_C"]["z"]) <= 3 and elapsed < 300)
    record_criterion("5 oracle equivalence", ok,
                     f"OPA max rel err {opa['max_relative_error']:.1e}, homodyne max |z| {hom['max_abs_z']:.2f} "
                     f"on 5 points, C_AB z {coin['C_AB']['z']:.2f}, Var z {coin['var_C']['z']:.2f} "
                     f"(exact variance), {elapsed:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the truncated coincidence-variance closed form overstates the "
                   "simulated variance by about two orders of magnitude; see the decisions ledger")
def test_criterion_5_truncated_variance(oracle_runs, record_criterion):
    coin = oracle_runs[2]
    t = coin["var_C_truncated"]
    record_criterion("5 Var vs truncated closed form (5%)", t["within_5_percent"],
                     f"simulated/truncated - 1 = {t['relative_error']:+.3f}")
    assert t["within_5_percent"]


def test_criterion_6_properties(record_criterion):
    rng = np.random.default_rng(SEED)
    failures = []

    # gaussian core
    worst_pure = max(abs(gc.entropy_bits(gc.make_tmsv(float(n)))) for n in 10 ** rng.uniform(-4, 2, 50))
    g = lambda N: (N + 1) * math.log2(N + 1) - N * math.log2(N) if N > 0 else 0.0
    worst_g = max(abs(gc.entropy_bits(gc.thermal(float(N))) - g(float(N))) for N in 10 ** rng.uniform(-6, 2, 50))
    worst_nu = min(gc.symplectic_eigenvalues(
        gc.apply_phase_insensitive_amp(gc.apply_loss(gc.make_tmsv(float(n)), 0, float(k)), 1, 1 + float(G), float(G)))
        .min() for n, k, G in zip(10 ** rng.uniform(-3, 1, 50), rng.uniform(0, 1, 50), 10 ** rng.uniform(0, 3, 50)))
    if worst_pure > 1e-9 or worst_g > 1e-10 or worst_nu < 0.25 - 1e-9:
        failures.append("gaussian core")

    # Holevo non-negativity and bit symmetry
    worst_gap, worst_asym = math.inf, 0.0
    for _ in range(100):
        G_B = float(10 ** rng.uniform(0, 5))
        p = SystemParams(N_S=float(rng.uniform(0, 1)), L_km=float(rng.uniform(0, 150)), G_B=G_B,
                         N_B=G_B - 1 + float(10 ** rng.uniform(-2, 4)), kappa_B=float(rng.uniform(0, 0.99)),
                         f=float(rng.uniform(0.5, 1)))
        eve = solve_active_eve(p.N_S, p.kappa_S, p.f)
        worst_gap = min(worst_gap, holevo_ub_passive(p).per_mode_gap_bits, holevo_ub_active(p, eve).per_mode_gap_bits)
        for cond in (lambda b: passive_conditional_cov(p, b), lambda b: active_conditional_cov(p, eve, b)):
            worst_asym = max(worst_asym, abs(gc.entropy_bits(cond(0)) - gc.entropy_bits(cond(1))))
    if worst_gap < -1e-9 or worst_asym > 1e-10:
        failures.append("holevo")

    # asymptotic error-probability bound
    for N in (1e4, 1e5):
        for N_S in (1e-3, 1e-2, 0.05):
            p = SystemParams(N_B=N, N_LO=N, G_B=N, eta=1.0, N_S=N_S)
            if error_probability(ase_moments(p)) > 0.5 * math.exp(-p.M * p.kappa_S * p.G_B * p.N_S / p.N_B):
                failures.append("asymptotic bound")

    # bits/mode ordering on the loss grid
    loss_db = BoundsSettings().loss_db_grid
    pts = distance_sweep(NOMINAL, Configuration.ACTIVE, [db / NOMINAL.alpha_db_per_km for db in loss_db])
    if not all(r.bits_per_mode <= cvqkd_bits_per_mode(r.kappa_S) <= tgw_bound_bits_per_mode(r.kappa_S) for r in pts):
        failures.append("bits/mode ordering")

    # monitor estimator
    worst_scale, worst_bias = 0.0, 0.0
    for _ in range(100):
        p = SystemParams(N_S=float(10 ** rng.uniform(-4, -0.3)), L_km=float(rng.uniform(0, 100)),
                         eta=float(rng.uniform(0.1, 1)), kappa_B=float(rng.uniform(0.01, 0.5)),
                         f=float(rng.uniform(0, 1)))
        T = float(10 ** rng.uniform(-3, 3))
        worst_scale = max(worst_scale, abs(f_estimator_stddev(p, 4 * T) / f_estimator_stddev(p, T) - 0.5))
        worst_bias = max(worst_bias, abs(f_estimate(coincidence_rate(p), p) - p.f))
    if worst_scale > 1e-12 or worst_bias > 1e-12:
        failures.append("monitor estimator")

    ok = not failures
    record_criterion("6 property suites", ok,
                     f"pure-state S {worst_pure:.1e}, |S-g| {worst_g:.1e}, min nu {worst_nu:.6f}, "
                     f"min Holevo gap {worst_gap:.1e}, bit asymmetry {worst_asym:.1e}, "
                     f"1/sqrt(T) residual {worst_scale:.1e}, bias {worst_bias:.1e}"
                     + (f"; failing: {', '.join(failures)}" if failures else ""))
    assert ok


def test_criterion_7_determinism(tmp_path, record_criterion):
    commands = {
        "rate.csv": ["rate-sweep", "--set", "sweep.L_grid=0:60:10"],
        "monitor.csv": ["monitor-time", "--preset", "active", "--set", "monitor.L_grid=10:60:10"],
        "bounds.csv": ["bounds", "--set", "bounds.loss_db_grid=0:12:2"],
        "report.json": ["mc-verify", "--seed", str(SEED)],
    }
    identical = {}
    for name, args in commands.items():
        outs = []
        for k in range(2):
            path = tmp_path / f"{k}-{name}"
            assert run([*args, "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        identical[name] = outs[0] == outs[1]
    report = json.loads((tmp_path / "0-report.json").read_text())
    ok = all(identical.values()) and report["passed"]
    record_criterion("7 determinism", ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                                    for k, v in identical.items()))
    assert ok
