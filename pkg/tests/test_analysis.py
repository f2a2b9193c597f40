import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from beamopt.analysis import (
    NO_RECOMMENDATION,
    FeasibilityGrid,
    analytic_theta_bar,
    feasibility_bound,
    mc_theta_bar,
    recommend_config,
    sweep_feasibility,
)
from beamopt.antenna import DomainError
from beamopt.scenario import ScenarioConfig
from beamopt.timing import burst_timing


def theta_bar_closed_form(n, n_ss, t_ss, v, radius):
    """Both pieces of the outer integral done by hand.

    Below y* = 2 c / delta the inner mean is c / y, above it delta/4 + c^2 / (y^2 delta).
    """
    delta = 2.0 / n
    c = v * burst_timing(n, n_ss, t_ss, 4).t_bm_s
    if c == 0:
        return delta / 4
    y_star = 2 * c / delta
    if y_star >= radius:
        return 2 * c / radius
    near = 2 * c * y_star / radius**2
    far = (delta / 4) * (radius**2 - y_star**2) / radius**2 + 2 * c * c / (delta * radius**2) * math.log(radius / y_star)
    return near + far


speeds = st.one_of(st.just(0.0), st.floats(1e-3, 30.0))


@given(st.integers(1, 64), st.sampled_from([8, 16, 32, 64]), st.sampled_from([5e-3, 20e-3, 160e-3]),
       speeds, st.floats(20.0, 500.0))
def test_quadrature_matches_closed_form(n, n_ss, t_ss, v, radius):
    got = analytic_theta_bar(n, n_ss, t_ss, v, radius).theta_bar
    assert got == pytest.approx(theta_bar_closed_form(n, n_ss, t_ss, v, radius), abs=1e-9)


@given(st.integers(1, 64), speeds)
def test_breakdown_components_and_triangle_inequality(n, v):
    b = analytic_theta_bar(n, 8, 40e-3, v, 100.0)
    assert b.theta_bar_i == pytest.approx(0.5 / n)
    t_bm = burst_timing(n, 8, 40e-3, 4).t_bm_s
    assert b.theta_bar_v == pytest.approx(2 * v * t_bm / 100.0)
    assert 0 <= b.theta_bar <= b.theta_bar_i + b.theta_bar_v + 1e-9


def test_zero_speed_gives_quarter_beamwidth():
    for n in (1, 7, 64):
        assert analytic_theta_bar(n, 8, 20e-3, 0.0, 100.0).theta_bar == pytest.approx(0.5 / n)
        mc = mc_theta_bar(n, 8, 20e-3, 0.0, ScenarioConfig(), samples=20_000)
        assert abs(mc.theta_bar - 0.5 / n) <= 3 * mc.std_error


def test_theta_i_decreases_with_antenna_count():
    vals = [analytic_theta_bar(n, 8, 20e-3, 2.0, 100.0).theta_bar_i for n in range(1, 65)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_theta_v_non_decreasing_at_burst_boundaries():
    from beamopt.antenna import sector_count

    last = None
    for n in range(1, 65):
        bursts = -(-sector_count(n) // 8)
        if n > 1 and bursts != -(-sector_count(n - 1) // 8):
            val = analytic_theta_bar(n, 8, 40e-3, 4.0, 100.0).theta_bar_v
            if last is not None:
                assert val >= last
            last = val


def test_fig5_configuration_matches_monte_carlo():
    an = analytic_theta_bar(16, 16, 40e-3, 4.0, 100.0).theta_bar
    mc = mc_theta_bar(16, 16, 40e-3, 4.0, ScenarioConfig(), samples=100_000)
    assert abs(an - mc.theta_bar) <= max(0.005 * an, 3 * mc.std_error)


def test_seam_beams_bias_the_full_circle_average():
    cfg = ScenarioConfig()
    inner = mc_theta_bar(4, 8, 20e-3, 0.0, cfg, samples=100_000)
    whole = mc_theta_bar(4, 8, 20e-3, 0.0, cfg, samples=100_000, include_seam=True)
    assert abs(inner.theta_bar - 0.125) <= 3 * inner.std_error
    assert abs(whole.theta_bar - 0.125) > 3 * whole.std_error


def test_feasibility_bound_examples():
    assert feasibility_bound(8, 8, 10.0, 0.125) == pytest.approx(10 * (math.asin(0.25) - 0.125) / 3)
    assert feasibility_bound(8, 8, 10.0, 0.125) == pytest.approx(0.426, abs=5e-4)
    assert feasibility_bound(8, 8, 10.0, math.asin(0.25)) == pytest.approx(0.0, abs=1e-15)
    assert feasibility_bound(8, 32, 10.0, 0.1) == math.inf
    assert feasibility_bound(7.4, 8, 10.0, 0.1) > 0
    with pytest.raises(DomainError):
        feasibility_bound(1, 8, 10.0, 0.1)


def _grid(cells):
    g = FeasibilityGrid((8, 16), (5e-3, 10e-3, 20e-3), (5,), (200,), (0.0,))
    for n in (8, 16):
        for t in (5e-3, 10e-3, 20e-3):
            g.cells[(n, 200, 0.0, 5.0, t)] = (n, t) in cells
    return g


def test_recommendation_prefers_fewer_ssbs_then_longer_period():
    rec = recommend_config(_grid({(8, 5e-3), (8, 10e-3), (16, 20e-3)}), 200, 0.0, 5)
    assert (rec.n_ss, rec.t_ss_s) == (8, 10e-3)
    rec = recommend_config(_grid({(16, 5e-3), (16, 20e-3)}), 200, 0.0, 5)
    assert (rec.n_ss, rec.t_ss_s) == (16, 20e-3)
    assert recommend_config(_grid(set()), 200, 0.0, 5) == NO_RECOMMENDATION
    assert str(NO_RECOMMENDATION) == "NO-RECOMMENDATION"


def test_frontier_agrees_with_exhaustive_and_grid_is_downward_closed():
    cfg = ScenarioConfig(mc_iterations=600, num_ues=50)
    speeds = (1, 4, 10, 20)
    kwargs = dict(n_ss=(8,), speeds_mps=speeds, num_ues=(50,), misdetection_probs=(0.0,), eps_feas=0.15)
    full = sweep_feasibility(cfg, strategy="exhaustive", **kwargs)
    fast = sweep_feasibility(cfg, strategy="frontier", **kwargs)
    assert full.cells == fast.cells
    assert full.max_product_m == fast.max_product_m
    assert len(fast.results) < len(full.results)
    feasible = [(v * t) for (_, _, _, v, t), ok in full.cells.items() if ok]
    infeasible = [(v * t) for (_, _, _, v, t), ok in full.cells.items() if not ok]
    if feasible and infeasible:
        assert max(feasible) < min(infeasible) + 1e-12
    rows = full.rows()
    assert len(rows) == len(speeds) * 6 and all(r["simulated"] for r in rows)


def test_analytic_overlay_recorded():
    cfg = ScenarioConfig(mc_iterations=256, num_ues=20)
    g = sweep_feasibility(cfg, n_ss=(8,), speeds_mps=(1, 2), num_ues=(20,), d_min_m=10.0, eps_feas=0.15)
    (key,) = g.slice_keys()
    if g.max_product_m[key] is not None:
        assert g.analytic_bound_m[key] >= 0
