"""Average angular offset, feasibility bounds and feasibility-region sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import rng
from .antenna import DomainError, beamwidth, fnbw, nearest_beam, sector_count
from .scenario import BURST_PERIOD_CHOICES_S, SSB_PER_BURST_CHOICES, ScenarioConfig, distance_from_uniform
from .solver import DEFAULT_EPS_FEAS, SolveResult, evaluate_cells
from .timing import burst_timing

QUAD_ABS_TOL = 1e-9
# substream index reserved for offset sampling, far from any UE index
_OFFSET_STREAM = 1 << 40


@dataclass(frozen=True)
class OffsetBreakdown:
    theta_bar: float
    theta_bar_i: float
    theta_bar_v: float
    std_error: float = 0.0
    samples: int = 0


def _inner_mean(a, delta):
    """E|x + a| over x uniform on [-delta/2, delta/2], for a >= 0."""
    if a >= 0.5 * delta:
        return a
    return 0.25 * delta + a * a / delta


def analytic_theta_bar(n_gnb: int, n_ss: int, t_ss_s: float, v_mps: float, radius_m: float,
                       numerology: int = 4) -> OffsetBreakdown:
    """Mean |theta_i + theta_v| for a UE uniform in the disc, by 1D quadrature."""
    if radius_m <= 0:
        raise DomainError("radius must be positive")
    if v_mps < 0:
        raise DomainError("speed must be non-negative")
    delta = beamwidth(n_gnb)
    shift = v_mps * burst_timing(n_gnb, n_ss, t_ss_s, numerology).t_bm_s
    theta_i = 0.25 * delta
    theta_v = 2.0 * shift / radius_m
    if shift == 0.0:
        return OffsetBreakdown(theta_i, theta_i, 0.0)

    def integrand(y):
        if y <= 0.0:
            return 2.0 * shift / radius_m**2
        return _inner_mean(shift / y, delta) * 2.0 * y / radius_m**2

    # the inner closed form switches branch where shift / y = delta / 2
    kink = 2.0 * shift / delta
    points = [kink] if 0.0 < kink < radius_m else None
    total, _ = integrate.quad(integrand, 0.0, radius_m, points=points, epsabs=QUAD_ABS_TOL,
                              epsrel=0.0, limit=200)
    return OffsetBreakdown(total, theta_i, theta_v)


def mc_theta_bar(n_gnb: int, n_ss: int, t_ss_s: float, v_mps: float, scenario: ScenarioConfig,
                 samples: int = 100_000, include_seam: bool = False) -> OffsetBreakdown:
    """Sample mean of |theta_i + theta_v| with its standard error.

    By default UEs served by the two beams adjacent to the 2*pi seam are
    discarded: the codebook overshoots the circle there, so those beams see a
    truncated offset distribution. Set ``include_seam`` to average over the
    whole circle instead.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    delta = beamwidth(n_gnb)
    s_d = sector_count(n_gnb)
    shift = v_mps * burst_timing(n_gnb, n_ss, t_ss_s, scenario.numerology).t_bm_s
    keep_share = 1.0 if include_seam or s_d <= 2 else (s_d - 2) / s_d
    draw = int(samples / keep_share * 1.1) + 64
    idx = np.arange(draw, dtype=np.uint64)
    states = rng.stream_states(scenario.master_seed, idx, _OFFSET_STREAM)
    phi = 2.0 * np.pi * rng.uniforms_at(states, rng.SLOT_PHI)
    d = distance_from_uniform(1.0 - rng.uniforms_at(states, rng.SLOT_DIST), scenario.cell_radius_m)
    beam, th_i = nearest_beam(phi, delta, s_d)
    if not include_seam and s_d > 2:
        inner = (beam != 0) & (beam != s_d - 1)
        th_i, d = th_i[inner], d[inner]
    if len(d) < samples:
        raise RuntimeError("not enough interior-beam samples drawn")
    th_i, d = th_i[:samples], d[:samples]
    th_v = shift / d
    total = np.abs(th_i + th_v)
    return OffsetBreakdown(
        theta_bar=float(total.mean()),
        theta_bar_i=float(np.abs(th_i).mean()),
        theta_bar_v=float(th_v.mean()),
        std_error=float(total.std(ddof=1) / math.sqrt(samples)),
        samples=samples,
    )


def feasibility_bound(n_star_gnb: float, n_ss: int, d_min_m: float, theta_i_max_rad: float) -> float:
    """Worst-case upper bound on v*T_SS that keeps every UE inside the first null.

    ``n_star_gnb`` may be a (non-integer) average antenna count.
    """
    if n_star_gnb < 2:
        raise DomainError("bound needs n_star_gnb >= 2 (first null undefined below)")
    if d_min_m < 0:
        raise DomainError("d_min_m must be non-negative")
    if float(n_star_gnb).is_integer():
        half_null = 0.5 * fnbw(int(n_star_gnb))
        s_d = sector_count(int(n_star_gnb))
    else:
        half_null = math.asin(2.0 / n_star_gnb)
        s_d = math.ceil(math.pi * n_star_gnb)
    extra_bursts = -(-s_d // n_ss) - 1
    if extra_bursts == 0:
        return math.inf
    return max(0.0, d_min_m * (half_null - theta_i_max_rad) / extra_bursts)


@dataclass(frozen=True)
class SliceKey:
    n_ss: int
    num_ues: int
    misdetection_prob: float


@dataclass
class FeasibilityGrid:
    n_ss: tuple
    t_ss_s: tuple
    speeds_mps: tuple
    num_ues: tuple
    misdetection_probs: tuple
    # (n_ss, K, P_MD, v, T_SS) -> feasible
    cells: dict = field(default_factory=dict)
    # cells that were actually simulated, with their results
    results: dict = field(default_factory=dict)
    # SliceKey -> largest feasible v*T_SS on the grid, None when nothing is feasible
    max_product_m: dict = field(default_factory=dict)
    # SliceKey -> analytic bound at the slice's average N*
    analytic_bound_m: dict = field(default_factory=dict)

    def slice_keys(self):
        return [SliceKey(n, k, p) for n in self.n_ss for k in self.num_ues for p in self.misdetection_probs]

    def is_feasible(self, n_ss, num_ues, p_md, v, t_ss) -> bool:
        return self.cells[(n_ss, num_ues, p_md, float(v), float(t_ss))]

    def rows(self):
        """One flat record per grid cell, in axis order."""
        out = []
        for key in self.slice_keys():
            for v in self.speeds_mps:
                for t in self.t_ss_s:
                    ck = (key.n_ss, key.num_ues, key.misdetection_prob, float(v), float(t))
                    res = self.results.get(ck)
                    out.append({
                        "n_ss": key.n_ss,
                        "num_ues": key.num_ues,
                        "misdetection_prob": key.misdetection_prob,
                        "v_mps": v,
                        "t_ss_ms": t * 1e3,
                        "v_t_ss_m": v * t,
                        "feasible": self.cells[ck],
                        "simulated": res is not None,
                        "feasible_fraction": res.feasible_fraction if res else math.nan,
                        "n_star": res.n_star if res else math.nan,
                    })
        return out

    def table(self, columns: str = "num_ues"):
        """Upper-bound table: rows are N_SS, columns K or P_MD; None means not feasible."""
        if columns not in ("num_ues", "misdetection_prob"):
            raise ValueError("columns must be 'num_ues' or 'misdetection_prob'")
        table = {}
        for key, best in self.max_product_m.items():
            col = getattr(key, columns)
            table.setdefault(key.n_ss, {})[col] = best
        return table


def grid_products(speeds, periods):
    return sorted({(float(v), float(t)) for v in speeds for t in periods}, key=lambda c: (c[0] * c[1], c[1]))


def sweep_feasibility(scenario: ScenarioConfig, n_ss=SSB_PER_BURST_CHOICES, t_ss_s=BURST_PERIOD_CHOICES_S,
                      speeds_mps=tuple(range(1, 31)), num_ues=(50,), misdetection_probs=(0.0,), *,
                      eps_feas: float = DEFAULT_EPS_FEAS, strategy: str = "exhaustive",
                      d_min_m: float | None = None, threads: int | None = None,
                      use_jit: bool | None = None, progress=None) -> FeasibilityGrid:
    """Map feasibility over the (N_SS, T_SS, v, K, P_MD) grid.

    ``strategy="exhaustive"`` simulates every cell. ``"frontier"`` orders the
    (v, T_SS) cells of a slice by v*T_SS and bisects for the last feasible
    one, filling the rest in by downward closure; it simulates about
    log2(cells) of them.
    """
    if strategy not in ("exhaustive", "frontier"):
        raise ValueError("strategy must be 'exhaustive' or 'frontier'")
    grid = FeasibilityGrid(tuple(n_ss), tuple(float(t) for t in t_ss_s), tuple(speeds_mps),
                           tuple(num_ues), tuple(misdetection_probs))
    ordered = grid_products(speeds_mps, t_ss_s)
    for key in grid.slice_keys():
        cfg = scenario.replace(n_ss=key.n_ss, num_ues=key.num_ues, misdetection_prob=key.misdetection_prob)
        solved: dict[tuple, SolveResult] = {}

        def run(cells):
            res = evaluate_cells(cfg, cells, eps_feas=eps_feas, threads=threads, use_jit=use_jit)
            solved.update(zip(cells, res))

        if strategy == "exhaustive":
            run(ordered)
            feasible = [solved[c].feasible for c in ordered]
        else:
            lo, hi = -1, len(ordered)  # ordered[:lo+1] feasible, ordered[hi:] infeasible
            while hi - lo > 1:
                mid = (lo + hi) // 2
                run([ordered[mid]])
                if solved[ordered[mid]].feasible:
                    lo = mid
                else:
                    hi = mid
            feasible = [i <= lo for i in range(len(ordered))]
        best = None
        for (v, t), ok in zip(ordered, feasible):
            grid.cells[(key.n_ss, key.num_ues, key.misdetection_prob, v, t)] = ok
            if ok:
                best = v * t if best is None else max(best, v * t)
        for (v, t), res in solved.items():
            grid.results[(key.n_ss, key.num_ues, key.misdetection_prob, v, t)] = res
        grid.max_product_m[key] = best
        n_stars = [r.n_star for r in solved.values() if r.feasible]
        if d_min_m is not None and n_stars:
            n_bar = float(np.mean(n_stars))
            if n_bar >= 2:
                grid.analytic_bound_m[key] = feasibility_bound(n_bar, key.n_ss, d_min_m, 0.5 * beamwidth(n_bar))
        if progress is not None:
            progress(key, best)
    return grid


@dataclass(frozen=True)
class Recommendation:
    n_ss: int | None
    t_ss_s: float | None

    @property
    def found(self) -> bool:
        return self.n_ss is not None

    def __str__(self):
        if not self.found:
            return "NO-RECOMMENDATION"
        return f"N_SS={self.n_ss}, T_SS={self.t_ss_s * 1e3:g} ms"


NO_RECOMMENDATION = Recommendation(None, None)


def recommend_config(grid: FeasibilityGrid, num_ues: int, misdetection_prob: float, v_mps: float) -> Recommendation:
    """Fewest SSBs per burst, then the longest burst period, among feasible cells."""
    options = [
        (n, t)
        for n in grid.n_ss
        for t in grid.t_ss_s
        if grid.cells.get((n, num_ues, misdetection_prob, float(v_mps), float(t)), False)
    ]
    if not options:
        return NO_RECOMMENDATION
    n, t = min(options, key=lambda c: (c[0], -c[1]))
    return Recommendation(n, t)
