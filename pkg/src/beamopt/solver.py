"""Monte Carlo search for the smallest antenna count and its transmit power.

Each iteration draws a UE population and scans N = 1, 2, ... until the SNR
condition holds for every UE (or for all but a tolerated misdetection share),
then back-solves the transmit power that makes the binding UE sit exactly on
the threshold. Results are averaged over the iterations that found a count.

A configuration counts as feasible when at most ``eps_feas * N_MC`` iterations
fail to find any count up to ``max_antennas``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import rng
from ._accel import USE_JIT, backend_name
from .antenna import MAX_ANTENNAS, BeamConfig, array_gain, initial_beam_and_offset
from .channel import link_coefficients, snr_factor
from .kernels import codebook_tables, scan_cells
from .power import DEFAULT_POWER, PowerModel, energy_arrays
from .scenario import (
    SHADOW_STD_LOS_DB,
    SHADOW_STD_NLOS_DB,
    ConfigError,
    ScenarioConfig,
    dist3d,
    distance_from_uniform,
    sample_population,
    watt_to_dbm,
)
from .timing import burst_timing, mobility_offset, total_offset

# Share of iterations allowed to find no antenna count before a configuration
# is declared infeasible. Frozen deep fades leave a floor of failing
# iterations that grows with K, so a strict zero rejects every configuration.
DEFAULT_EPS_FEAS = 0.15
BLOCK_ITERATIONS = 64
BLOCKS_PER_ROUND = 8


def default_threads() -> int:
    env = os.environ.get("BEAMOPT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("BEAMOPT_THREADS", f"not an integer: {env!r}") from None
    return os.cpu_count() or 1


def required_passing(num_ues: int, misdetection_prob: float) -> int:
    """Smallest UE count that satisfies count >= (1 - P_MD) * K, at least 1."""
    # rounding first keeps e.g. (1 - 0.1) * 200 from landing just above 180
    return max(1, math.ceil(round((1.0 - misdetection_prob) * num_ues, 9)))


@dataclass(frozen=True)
class SolveResult:
    feasible: bool
    n_star: float
    p_t_star_w: float
    e_c_j: float
    p_c_w: float
    feasible_fraction: float
    iterations_used: int
    iterations_requested: int
    eps_feas: float
    backend: str
    n_star_samples: np.ndarray | None = field(default=None, repr=False, compare=False)
    p_t_samples_w: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def status(self) -> str:
        return "FEASIBLE" if self.feasible else "INFEASIBLE"

    @property
    def p_t_star_dbm(self) -> float:
        return watt_to_dbm(self.p_t_star_w) if self.p_t_star_w > 0 else math.nan

    def to_row(self) -> dict:
        return {
            "status": self.status,
            "n_star": self.n_star,
            "p_t_star_dbm": self.p_t_star_dbm,
            "e_c_mj": self.e_c_j * 1e3,
            "p_c_mw": self.p_c_w * 1e3,
            "feasible_fraction": self.feasible_fraction,
            "iterations_used": self.iterations_used,
        }


@dataclass
class _CellStats:
    evaluated: int = 0
    feasible: int = 0
    sum_n: float = 0.0
    sum_p: float = 0.0
    sum_ec: float = 0.0
    sum_pc: float = 0.0
    n_samples: list = field(default_factory=list)
    p_samples: list = field(default_factory=list)


@lru_cache(maxsize=None)
def _codebook(n_max: int):
    return codebook_tables(n_max)


@lru_cache(maxsize=4096)
def _timing_row(n_ss: int, t_ss_s: float, numerology: int, n_max: int):
    timings = [burst_timing(n, n_ss, t_ss_s, numerology) for n in range(1, n_max + 1)]
    return np.array([t.t_bm_s for t in timings]), timings[0].t_ssb_s


def block_inputs(config: ScenarioConfig, start: int, stop: int):
    """Per-UE draws that do not depend on the antenna count, for iterations [start, stop)."""
    its = np.arange(start, stop, dtype=np.uint64)[:, None]
    ues = np.arange(config.num_ues, dtype=np.uint64)[None, :]
    states = rng.stream_states(config.master_seed, its, ues)
    phi = 2.0 * np.pi * rng.uniforms_at(states, rng.SLOT_PHI)
    d2 = distance_from_uniform(1.0 - rng.uniforms_at(states, rng.SLOT_DIST), config.cell_radius_m)
    sh_l = sh_n = 0.0
    if config.shadowing_enabled:
        z_l, z_n = rng.normal_pair_from_uniforms(
            rng.uniforms_at(states, rng.SLOT_SHADOW), rng.uniforms_at(states, rng.SLOT_SHADOW + 1)
        )
        sh_l, sh_n = SHADOW_STD_LOS_DB * z_l, SHADOW_STD_NLOS_DB * z_n
    a, b = link_coefficients(d2, dist3d(config, d2), config, sh_l, sh_n)
    return states, phi, d2, a, b


def evaluate_cells(config: ScenarioConfig, cells, *, eps_feas: float = DEFAULT_EPS_FEAS,
                   threads: int | None = None, power: PowerModel = DEFAULT_POWER,
                   max_antennas: int = MAX_ANTENNAS, keep_samples: bool = False,
                   prune: bool = True, use_jit: bool | None = None, progress=None) -> list[SolveResult]:
    """Solve several ``(speed, burst_period)`` cells that share ``config``'s draws.

    With ``prune`` a cell stops being simulated once its infeasible count
    exceeds the budget; pruning happens only between fixed-size rounds so the
    outcome does not depend on the thread count.
    """
    if not 0.0 <= eps_feas < 1.0:
        raise ConfigError("eps_feas", "must lie in [0, 1)")
    if not 1 <= max_antennas <= MAX_ANTENNAS:
        raise ConfigError("max_antennas", f"must lie in [1, {MAX_ANTENNAS}]")
    cells = [(float(v), float(t)) for v, t in cells]
    threads = default_threads() if threads is None else max(1, int(threads))
    n_cells = len(cells)
    n_mc = config.mc_iterations
    budget = math.floor(eps_feas * n_mc + 1e-9)
    need = required_passing(config.num_ues, config.misdetection_prob)
    delta, s_d = _codebook(max_antennas)
    rows = [_timing_row(config.n_ss, t, config.numerology, max_antennas) for _, t in cells]
    t_bm = np.stack([r[0] for r in rows])
    t_ssb = rows[0][1] if rows else 0.0
    speeds = np.array([v for v, _ in cells])
    per_candidate = config.fading_mode == "per_candidate"
    stats = [_CellStats() for _ in cells]
    alive = np.ones(n_cells, dtype=bool)

    def run_block(bounds):
        lo, hi = bounds
        states, phi, d2, a, b = block_inputs(config, lo, hi)
        return scan_cells(states, phi, d2, a, b, speeds, t_bm, delta, s_d,
                          config.max_tx_power_w, config.snr_threshold, need, per_candidate,
                          alive=alive.copy(), use_jit=use_jit)

    starts = list(range(0, n_mc, BLOCK_ITERATIONS))
    round_len = BLOCKS_PER_ROUND
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for r0 in range(0, len(starts), round_len):
            if not alive.any():
                break
            bounds = [(s, min(s + BLOCK_ITERATIONS, n_mc)) for s in starts[r0:r0 + round_len]]
            for n_blk, p_blk in pool.map(run_block, bounds):
                for c in np.flatnonzero(alive):
                    st = stats[c]
                    n_c, p_c = n_blk[c], p_blk[c]
                    ok = n_c > 0
                    st.evaluated += len(n_c)
                    st.feasible += int(ok.sum())
                    if ok.any():
                        t_ss = cells[c][1]
                        e_c, p_avg = energy_arrays(n_c[ok], p_c[ok], t_ssb, config.n_ss, t_ss, power)
                        st.sum_n += float(n_c[ok].sum())
                        st.sum_p += float(p_c[ok].sum())
                        st.sum_ec += float(e_c.sum())
                        st.sum_pc += float(p_avg.sum())
                    if keep_samples:
                        st.n_samples.append(n_c.copy())
                        st.p_samples.append(p_c.copy())
            if prune:
                for c in range(n_cells):
                    if stats[c].evaluated - stats[c].feasible > budget:
                        alive[c] = False
            if progress is not None:
                progress(min(starts[min(r0 + round_len, len(starts)) - 1] + BLOCK_ITERATIONS, n_mc), n_mc)

    out = []
    for st in stats:
        infeasible = st.evaluated - st.feasible
        ok = st.evaluated == n_mc and infeasible <= budget and st.feasible > 0
        f = max(st.feasible, 1)
        out.append(SolveResult(
            feasible=ok,
            n_star=st.sum_n / f if st.feasible else math.nan,
            p_t_star_w=st.sum_p / f if st.feasible else math.nan,
            e_c_j=st.sum_ec / f if st.feasible else math.nan,
            p_c_w=st.sum_pc / f if st.feasible else math.nan,
            feasible_fraction=st.feasible / st.evaluated if st.evaluated else 0.0,
            iterations_used=st.evaluated,
            iterations_requested=n_mc,
            eps_feas=eps_feas,
            backend=backend_name() if use_jit is None else ("numba" if use_jit else "numpy"),
            n_star_samples=np.concatenate(st.n_samples) if keep_samples and st.n_samples else None,
            p_t_samples_w=np.concatenate(st.p_samples) if keep_samples and st.p_samples else None,
        ))
    return out


@dataclass(frozen=True)
class Problem:
    """A scenario plus the constraint flavour.

    ``"P1"`` requires every UE to clear the threshold and ignores the
    scenario's misdetection probability; ``"P2"`` tolerates that share of
    UEs falling short.
    """

    scenario: ScenarioConfig
    kind: str = "P2"

    def __post_init__(self):
        if self.kind not in ("P1", "P2"):
            raise ConfigError("kind", f"must be 'P1' or 'P2', got {self.kind!r}")
        if self.kind == "P1" and self.scenario.misdetection_prob != 0.0:
            object.__setattr__(self, "scenario", self.scenario.replace(misdetection_prob=0.0))


@dataclass(frozen=True)
class IterationResult:
    n_star: int
    p_t_star_w: float
    e_c_j: float
    p_c_w: float


def _scenario(problem) -> ScenarioConfig:
    return problem.scenario if isinstance(problem, Problem) else problem


def solve(problem: Problem | ScenarioConfig, **kwargs) -> SolveResult:
    """Solve the scenario at its own speed and burst period."""
    config = _scenario(problem)
    return evaluate_cells(config, [(config.ue_speed_mps, config.t_ss_s)], **kwargs)[0]


def solve_iteration(problem: Problem | ScenarioConfig, iteration: int, max_antennas: int = MAX_ANTENNAS,
                    power: PowerModel = DEFAULT_POWER, use_jit: bool | None = None) -> IterationResult | None:
    """One Monte Carlo iteration; ``None`` when no antenna count works."""
    config = _scenario(problem)
    need = required_passing(config.num_ues, config.misdetection_prob)
    delta, s_d = _codebook(max_antennas)
    t_bm, t_ssb = _timing_row(config.n_ss, config.t_ss_s, config.numerology, max_antennas)
    states, phi, d2, a, b = block_inputs(config, iteration, iteration + 1)
    n, p = scan_cells(states, phi, d2, a, b, np.array([config.ue_speed_mps]), t_bm[None, :], delta, s_d,
                      config.max_tx_power_w, config.snr_threshold, need,
                      config.fading_mode == "per_candidate", use_jit=use_jit)
    n_star, p_star = int(n[0, 0]), float(p[0, 0])
    if n_star == 0:
        return None
    e_c, p_c = energy_arrays(n_star, p_star, t_ssb, config.n_ss, config.t_ss_s, power)
    return IterationResult(n_star, p_star, float(e_c), float(p_c))


def brute_force_iteration(config: ScenarioConfig, iteration: int,
                          max_antennas: int = MAX_ANTENNAS) -> tuple[int, float] | None:
    """Reference solver built from the scalar per-UE model functions.

    Slow; intended for cross-checking :func:`solve_iteration` on small cases.
    """
    need = required_passing(config.num_ues, config.misdetection_prob)
    for n in range(1, max_antennas + 1):
        pop = sample_population(config, iteration, candidate=n)
        beams = BeamConfig.build(n)
        timing = burst_timing(n, config.n_ss, config.t_ss_s, config.numerology)
        gammas = []
        for k in range(len(pop)):
            ue = pop.ue(k)
            _, th_i = initial_beam_and_offset(ue.phi_rad, beams)
            th = total_offset(th_i, mobility_offset(ue, config.ue_speed_mps, timing))
            gammas.append(snr_factor(ue, array_gain(n, th), config).gamma_per_watt)
        gammas.sort(reverse=True)
        if sum(config.max_tx_power_w * g >= config.snr_threshold for g in gammas) >= need:
            return n, config.snr_threshold / gammas[need - 1]
    return None
