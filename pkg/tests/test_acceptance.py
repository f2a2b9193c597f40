"""Acceptance suite: one test per target, each printing a PASS/FAIL line.

Targets are checked at their stated tolerances. Trend checks at the end are
report-only and never fail.
"""

import math

import numpy as np
import pytest

from beamopt.analysis import analytic_theta_bar, mc_theta_bar, recommend_config, sweep_feasibility
from beamopt.antenna import array_gain, fnbw
from beamopt.power import energy_arrays, energy_lower_bound
from beamopt.scenario import BURST_PERIOD_CHOICES_S, SSB_PER_BURST_CHOICES, ScenarioConfig, watt_to_dbm
from beamopt.solver import Problem, brute_force_iteration, evaluate_cells, solve, solve_iteration
from beamopt.timing import symbol_duration

SPEEDS = tuple(range(1, 31))
BASE = ScenarioConfig(max_tx_power_dbm=18.0, snr_threshold_db=7.0)
SWEEP_ITERATIONS = 2000

TABLE_K = {
    8: [0.32, 0.16, 0.08, 0.03, None],
    16: [0.64, 0.32, 0.16, 0.06, None],
    32: [1.68, 0.72, 0.32, 0.12, None],
    64: [4.80, 1.76, 0.64, 0.32, None],
}
TABLE_K_COLUMNS = (50, 100, 200, 500, 1000)
TABLE_P_MD_COLUMNS = (0.0, 0.01, 0.05, 0.1)
TABLE_P_MD = {
    200: {8: [0.08, 0.32, 2.24, 4.8], 16: [0.16, 0.64, 4.8, 4.8], 32: [0.32, 1.6, 4.8, 4.8], 64: [0.64, 4.8, 4.8, 4.8]},
    500: {8: [0.03, 0.24, 2.24, 4.8], 16: [0.06, 0.56, 4.8, 4.8], 32: [0.14, 1.28, 4.8, 4.8], 64: [0.32, 4.8, 4.8, 4.8]},
}


def report(capsys, label, ok, detail):
    """``ok=None`` marks a report-only line."""
    status = "REPORT" if ok is None else ("PASS" if ok else "FAIL")
    with capsys.disabled():
        print(f"\n[acceptance] {label}: {status} ({detail})")


def within_step(got, want):
    """One grid step: both not-feasible, or within a factor of two (one T_SS step)."""
    if got is None or want is None:
        return got is None and want is None
    return want / 2 - 1e-9 <= got <= want * 2 + 1e-9


def adjacent(got, want):
    """A miss that still lands on a neighbouring grid step (within a factor of four)."""
    if got is None or want is None:
        return got is None and want is None
    return want / 4 - 1e-9 <= got <= want * 4 + 1e-9


def fmt(x):
    return "NF" if x is None else f"{x:.3g}"


@pytest.fixture(scope="module")
def table_k_grid():
    return sweep_feasibility(BASE.replace(mc_iterations=SWEEP_ITERATIONS), n_ss=SSB_PER_BURST_CHOICES,
                             speeds_mps=SPEEDS, num_ues=TABLE_K_COLUMNS, strategy="frontier")


@pytest.fixture(scope="module")
def table_p_md_grid():
    return sweep_feasibility(BASE.replace(mc_iterations=SWEEP_ITERATIONS), n_ss=SSB_PER_BURST_CHOICES,
                             speeds_mps=SPEEDS, num_ues=(200, 500), misdetection_probs=TABLE_P_MD_COLUMNS,
                             strategy="frontier")


def test_criterion_1_headline_operating_point(capsys):
    cfg = BASE.replace(n_ss=8, num_ues=50, mc_iterations=10_000)
    target = [(v, t) for v in (1.0, 5.0) for t in (5e-3, 10e-3, 20e-3, 40e-3)]
    fast = [(10.0, t) for t in (40e-3, 80e-3, 160e-3)]
    results = evaluate_cells(cfg, target + fast)
    n_vals = [r.n_star for r in results[: len(target)]]
    p_vals = [r.p_t_star_dbm for r in results[: len(target)]]
    n_ok = all(abs(n - 7.4) <= 0.4 for n in n_vals)
    p_ok = all(abs(p - 16.4) <= 0.5 for p in p_vals)
    feasible_ok = all(r.feasible for r in results[: len(target)])
    fast_ok = not any(r.feasible for r in results[len(target):])
    ok = n_ok and p_ok and feasible_ok and fast_ok
    detail = (f"N* in [{min(n_vals):.2f}, {max(n_vals):.2f}] target 7.4+-0.4; "
              f"P_t* in [{min(p_vals):.2f}, {max(p_vals):.2f}] dBm target 16.4+-0.5; "
              f"v=10 feasible fractions {[round(r.feasible_fraction, 3) for r in results[len(target):]]} "
              f"must be infeasible")
    report(capsys, "criterion 1 headline operating point", ok, detail)
    assert n_ok, detail
    assert p_ok, detail
    assert feasible_ok, detail
    assert fast_ok, detail


def test_criterion_2_feasibility_table(capsys, table_k_grid):
    hits, misses, cells = 0, [], []
    for n_ss, row in TABLE_K.items():
        for k, want in zip(TABLE_K_COLUMNS, row):
            got = table_k_grid.table("num_ues")[n_ss][k]
            cells.append(f"{n_ss}/{k}:{fmt(got)}")
            if within_step(got, want):
                hits += 1
            else:
                misses.append((n_ss, k, got, want))
    nf_ok = all(table_k_grid.table("num_ues")[n][1000] is None for n in TABLE_K)
    adjacent_ok = all(adjacent(g, w) for _, _, g, w in misses)
    ok = hits >= 16 and nf_ok and adjacent_ok
    report(capsys, "criterion 2 feasibility table", ok,
           f"{hits}/20 within one step, K=1000 all NF: {nf_ok}, misses {misses}; got {' '.join(cells)}")
    assert hits >= 16 and nf_ok and adjacent_ok


def test_criterion_3_misdetection_relaxation(capsys, table_p_md_grid):
    table = table_p_md_grid.max_product_m
    monotone = True
    reaches = True
    matched, total = 0, 0
    for k in (200, 500):
        for n_ss in SSB_PER_BURST_CHOICES:
            bounds = [table[next(s for s in table if (s.n_ss, s.num_ues, s.misdetection_prob) == (n_ss, k, p))]
                      for p in TABLE_P_MD_COLUMNS]
            as_num = [-1.0 if b is None else b for b in bounds]
            monotone &= all(a <= b for a, b in zip(as_num, as_num[1:]))
            for got, want in zip(bounds, TABLE_P_MD[k][n_ss]):
                matched += within_step(got, want)
                total += 1
            if n_ss == 8:
                for p, got in zip(TABLE_P_MD_COLUMNS, bounds):
                    if p >= 0.05:
                        reaches &= got is not None and within_step(got, 4.8)
    ok = monotone and reaches
    report(capsys, "criterion 3 misdetection relaxation", ok,
           f"monotone in P_MD: {monotone}; N_SS=8 at grid max for P_MD>=0.05: {reaches}; "
           f"table cells within one step {matched}/{total}")
    assert monotone and reaches


def test_criterion_4_design_guideline(capsys):
    grid = sweep_feasibility(BASE.replace(mc_iterations=SWEEP_ITERATIONS), n_ss=SSB_PER_BURST_CHOICES,
                             speeds_mps=(5,), num_ues=(200,), misdetection_probs=(0.0, 0.05, 0.1))
    strict = recommend_config(grid, 200, 0.0, 5)
    relaxed = [recommend_config(grid, 200, p, 5) for p in (0.05, 0.1)]
    ok_strict = strict.n_ss == 8 and strict.t_ss_s in (5e-3, 10e-3, 20e-3)
    ok_relaxed = all(r.n_ss == 8 and r.t_ss_s in (80e-3, 160e-3) for r in relaxed)
    ok = ok_strict and ok_relaxed
    report(capsys, "criterion 4 design guideline", ok,
           f"P_MD=0 -> {strict} (target N_SS=8, T_SS=10 ms); P_MD>=0.05 -> {[str(r) for r in relaxed]} "
           f"(target N_SS=8, T_SS=160 ms)")
    assert ok


def test_criterion_5_analytic_vs_monte_carlo_offset(capsys):
    cfg = ScenarioConfig()
    worst, failures = 0.0, []
    for n in (4, 8, 16, 32, 64):
        for v in (2.0, 4.0):
            for t in (20e-3, 40e-3):
                an = analytic_theta_bar(n, 8, t, v, cfg.cell_radius_m).theta_bar
                mc = mc_theta_bar(n, 8, t, v, cfg, samples=100_000)
                gap = abs(an - mc.theta_bar)
                allowed = max(0.005 * an, 3 * mc.std_error)
                worst = max(worst, gap / allowed)
                if gap > allowed:
                    failures.append((n, v, t, an, mc.theta_bar))
    ok = not failures
    report(capsys, "criterion 5 analytic vs Monte Carlo offset", ok,
           f"20 points, worst gap / allowance = {worst:.2f}, failures {failures}")
    assert ok


def test_criterion_6_product_law(capsys):
    cfg = ScenarioConfig()
    ratios = []
    for n in (16, 32):
        a = mc_theta_bar(n, 8, 20e-3, 4.0, cfg, samples=100_000).theta_bar
        b = mc_theta_bar(n, 8, 40e-3, 2.0, cfg, samples=100_000).theta_bar
        ra = analytic_theta_bar(n, 8, 20e-3, 4.0, 100.0).theta_bar / analytic_theta_bar(n, 8, 40e-3, 2.0, 100.0).theta_bar
        ratios.append((n, a / b, ra))
    ok = all(abs(r - 1) <= 0.01 and abs(ra - 1) <= 0.01 for _, r, ra in ratios)
    report(capsys, "criterion 6 product law", ok,
           "; ".join(f"N={n}: MC ratio {r:.5f}, analytic ratio {ra:.5f}" for n, r, ra in ratios))
    assert ok


def test_criterion_7_property_suite(capsys):
    checks = {}

    t_ssb = 4 * symbol_duration(4)
    p = np.linspace(1e-4, 0.2, 25)[None, :]
    n = np.arange(1, 65)[:, None]
    mono, bound = True, True
    for n_ss in SSB_PER_BURST_CHOICES:
        for t_ss in BURST_PERIOD_CHOICES_S:
            e_c, _ = energy_arrays(np.broadcast_to(n, (64, 25)), p, t_ssb, n_ss, t_ss)
            mono &= bool(np.all(np.diff(e_c, axis=0) > 0) and np.all(np.diff(e_c, axis=1) > 0))
            bound &= bool(np.all(e_c >= energy_lower_bound(n, p, t_ssb) * (1 - 1e-12)))
    checks["E_C monotone"] = mono
    checks["E_C lower bound"] = bound

    th = np.linspace(-1.5, 1.5, 301)
    checks["gain even"] = all(np.allclose(array_gain(k, th), array_gain(k, -th)) for k in range(1, 65))
    checks["gain peak N"] = all(array_gain(k, 0.0) == k for k in range(1, 65))
    checks["gain first null"] = all(abs(array_gain(k, fnbw(k) / 2)) < 1e-9 for k in range(2, 65))

    cfg = ScenarioConfig(mc_iterations=800, master_seed=12)
    a = solve(Problem(cfg, "P1"), keep_samples=True, threads=1)
    b = solve(Problem(cfg, "P2"), keep_samples=True, threads=1)
    checks["P2 at P_MD=0 equals P1"] = (a == b and np.array_equal(a.n_star_samples, b.n_star_samples)
                                        and np.array_equal(a.p_t_samples_w, b.p_t_samples_w, equal_nan=True))

    tight = True
    for pmd in (0.0, 0.1):
        c = ScenarioConfig(num_ues=20, misdetection_prob=pmd)
        for it in range(30):
            r = solve_iteration(c, it)
            ref = brute_force_iteration(c, it)
            if r is None:
                tight &= ref is None
                continue
            tight &= math.isclose(r.p_t_star_w, ref[1], rel_tol=1e-9) and r.p_t_star_w <= c.max_tx_power_w + 1e-12
    checks["power tightness"] = tight

    rs = np.random.default_rng(7)
    agree = True
    for seed in range(1000):
        c = ScenarioConfig(num_ues=int(rs.integers(1, 6)), master_seed=seed, ue_speed_mps=float(rs.choice([1.0, 10.0])),
                           snr_threshold_db=float(rs.uniform(0, 25)), misdetection_prob=float(rs.choice([0.0, 0.4])))
        r = solve_iteration(c, seed, max_antennas=8)
        ref = brute_force_iteration(c, seed, max_antennas=8)
        if r is None or ref is None:
            agree &= r is None and ref is None
        else:
            agree &= r.n_star == ref[0] and math.isclose(r.p_t_star_w, ref[1], rel_tol=1e-9)
    checks["brute-force oracle (1000 seeds)"] = agree

    cells = [(1.0, 5e-3), (10.0, 160e-3)]
    c = ScenarioConfig(mc_iterations=1200, num_ues=40)
    one = evaluate_cells(c, cells, threads=1, keep_samples=True)
    many = evaluate_cells(c, cells, threads=4, keep_samples=True)
    checks["thread-count invariance"] = all(
        x == y and np.array_equal(x.n_star_samples, y.n_star_samples)
        and np.array_equal(x.p_t_samples_w, y.p_t_samples_w, equal_nan=True)
        for x, y in zip(one, many)
    )

    ok = all(checks.values())
    report(capsys, "criterion 7 property suite", ok, ", ".join(f"{k}: {v}" for k, v in checks.items()))
    assert ok, checks


def test_trends_report_only(capsys):
    cfg = ScenarioConfig(snr_threshold_db=-5.0, num_ues=50, mc_iterations=2000)
    p_grid = np.arange(10.0, 31.0, 1.0)
    energy = []
    for p_t in p_grid:
        r = solve(cfg.replace(max_tx_power_dbm=float(p_t)))
        energy.append(r.e_c_j if r.feasible else math.nan)
    energy = np.array(energy)
    best = float(p_grid[np.nanargmin(energy)]) if np.isfinite(energy).any() else math.nan
    interior = 0 < np.nanargmin(energy) < len(p_grid) - 1 if np.isfinite(energy).any() else False
    near = any(abs(best - x) <= 3 for x in (18, 19, 20, 21, 22))
    report(capsys, "trend E_C vs P_T", None,
           f"minimum at P_T={best} dBm, interior {interior}, within 3 dB of 18..22 dBm: {near}")

    base = ScenarioConfig(num_ues=50, mc_iterations=1000, t_ss_s=20e-3)
    n_vs_p = [solve(base.replace(max_tx_power_dbm=p), eps_feas=0.5).n_star for p in (14.0, 18.0, 22.0, 26.0, 30.0)]
    n_vs_tau = [solve(base.replace(snr_threshold_db=t), eps_feas=0.5).n_star for t in (-5.0, 0.0, 5.0, 10.0)]
    dec = all(a >= b for a, b in zip(n_vs_p, n_vs_p[1:]))
    inc = all(a <= b for a, b in zip(n_vs_tau, n_vs_tau[1:]))
    report(capsys, "trend N* vs P_T and tau", None,
           f"decreasing in P_T: {dec}, increasing in tau: {inc}; N* over P_T 14..30: {[round(x, 2) for x in n_vs_p]}; over tau -5..10: {[round(x, 2) for x in n_vs_tau]}")
    tau0 = solve(base.replace(snr_threshold_db=0.0, max_tx_power_dbm=30.0, mc_iterations=4000))
    report(capsys, "reference point tau=0 dB, P_T=30 dBm", None,
           f"N*={tau0.n_star:.2f} (reference 2.01), P_t*={tau0.p_t_star_dbm:.2f} dBm (reference 20.4)")
