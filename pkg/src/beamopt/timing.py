"""SSB burst arithmetic and mobility-induced angular offsets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import DomainError, sector_count
from .scenario import BURST_PERIOD_CHOICES_S, SSB_PER_BURST_CHOICES, UeSample

SYMBOL_US_AT_N0 = 71.45
SYMBOLS_PER_SLOT = 14
SYMBOLS_PER_SSB = 4


def symbol_duration(numerology: int) -> float:
    return SYMBOL_US_AT_N0 * 1e-6 / 2**numerology


@dataclass(frozen=True)
class BurstTiming:
    t_symb_s: float
    t_slot_s: float
    t_ssb_s: float
    n_bursts: int
    n_ss_last: int
    t_last_s: float
    t_bm_s: float


def last_burst_duration(n_last: int, t_symb: float) -> float:
    """Time to send the SSBs of the final burst, two SSBs per slot."""
    t_slot = SYMBOLS_PER_SLOT * t_symb
    if n_last % 2 == 0:
        return (n_last // 2) * t_slot - 2 * t_symb
    return (n_last // 2) * t_slot + 6 * t_symb


def burst_timing(n_gnb: int, n_ss: int, t_ss_s: float, numerology: int) -> BurstTiming:
    if n_ss not in SSB_PER_BURST_CHOICES:
        raise DomainError(f"n_ss must be one of {SSB_PER_BURST_CHOICES}")
    if not any(math.isclose(t_ss_s, t, rel_tol=1e-9) for t in BURST_PERIOD_CHOICES_S):
        raise DomainError(f"t_ss_s must be one of {BURST_PERIOD_CHOICES_S}")
    s_d = sector_count(n_gnb)
    t_symb = symbol_duration(numerology)
    n_bursts = -(-s_d // n_ss)
    n_last = s_d - n_ss * (n_bursts - 1)
    t_last = last_burst_duration(n_last, t_symb)
    return BurstTiming(
        t_symb_s=t_symb,
        t_slot_s=SYMBOLS_PER_SLOT * t_symb,
        t_ssb_s=SYMBOLS_PER_SSB * t_symb,
        n_bursts=n_bursts,
        n_ss_last=n_last,
        t_last_s=t_last,
        t_bm_s=t_ss_s * (n_bursts - 1) + t_last,
    )


def mobility_offset(ue: UeSample | float, v_mps: float, timing: BurstTiming | float):
    """Angle swept by a UE moving tangentially at ``v`` during one sweep."""
    d = np.asarray(ue.dist2d_m if isinstance(ue, UeSample) else ue, dtype=float)
    t_bm = timing.t_bm_s if isinstance(timing, BurstTiming) else float(timing)
    if np.any(d <= 0):
        raise DomainError("tangential offset is undefined for a UE at the cell centre")
    out = v_mps * t_bm / d
    return out if out.ndim else float(out)


def total_offset(theta_i, theta_v):
    out = np.abs(np.asarray(theta_i, dtype=float) + theta_v)
    return out if out.ndim else float(out)
