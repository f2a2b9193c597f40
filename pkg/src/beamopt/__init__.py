"""Energy-minimal SSB beam sweeping for a small-cell gNB serving mobile UEs."""

__version__ = "0.1.0"

from .analysis import (
    FeasibilityGrid,
    OffsetBreakdown,
    Recommendation,
    analytic_theta_bar,
    feasibility_bound,
    mc_theta_bar,
    recommend_config,
    sweep_feasibility,
)
from .antenna import BeamConfig, DomainError, array_gain, initial_beam_and_offset, sector_count
from .channel import LinkBudget, path_loss_db, snr_factor
from .power import PowerModel, gnb_power, sweep_energy
from .scenario import ConfigError, ScenarioConfig, UeSample, load_config, sample_population, sample_ue
from .solver import IterationResult, Problem, SolveResult, solve, solve_iteration
from .timing import BurstTiming, burst_timing, mobility_offset, total_offset

__all__ = [
    "BeamConfig",
    "BurstTiming",
    "ConfigError",
    "DomainError",
    "FeasibilityGrid",
    "IterationResult",
    "LinkBudget",
    "OffsetBreakdown",
    "PowerModel",
    "Problem",
    "Recommendation",
    "ScenarioConfig",
    "SolveResult",
    "UeSample",
    "analytic_theta_bar",
    "array_gain",
    "burst_timing",
    "feasibility_bound",
    "gnb_power",
    "initial_beam_and_offset",
    "load_config",
    "mc_theta_bar",
    "mobility_offset",
    "path_loss_db",
    "recommend_config",
    "sample_population",
    "sample_ue",
    "sector_count",
    "snr_factor",
    "solve",
    "solve_iteration",
    "sweep_energy",
    "sweep_feasibility",
    "total_offset",
]
