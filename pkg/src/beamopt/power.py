"""Transmitter power model and beam-sweep energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antenna import sector_count
from .timing import BurstTiming


@dataclass(frozen=True)
class PowerModel:
    p_ps_w: float = 21.6e-3
    p_mixer_w: float = 0.3e-3
    p_lo_w: float = 22.5e-3
    p_lpf_w: float = 14e-3
    # Listed with the front-end parameters but not part of the transmitter
    # power sum; kept for completeness only.
    p_bb_w: float = 5e-3
    pae: float = 0.27
    dac_bits: int = 8
    dac_fs_hz: float = 1e9

    def __post_init__(self):
        for name in ("p_ps_w", "p_mixer_w", "p_lo_w", "p_lpf_w", "p_bb_w", "dac_fs_hz"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 < self.pae <= 1.0:
            raise ValueError("pae must lie in (0, 1]")
        if self.dac_bits < 1:
            raise ValueError("dac_bits must be >= 1")

    @property
    def p_rf_w(self) -> float:
        return 2.0 * self.p_mixer_w + 2.0 * self.p_lpf_w

    @property
    def p_fixed_w(self) -> float:
        """Everything in the transmitter sum that does not scale with N or P_t."""
        return self.p_rf_w + self.p_lo_w + 2.0 * dac_power(self)


DEFAULT_POWER = PowerModel()


@dataclass(frozen=True)
class EnergyReport:
    p_gnb_w: float
    e_c_j: float
    p_c_w: float


def dac_power(model: PowerModel = DEFAULT_POWER) -> float:
    return 1.5e-5 * 2.0**model.dac_bits + 9e-12 * model.dac_bits * model.dac_fs_hz


def gnb_power(n_gnb, p_t_w, model: PowerModel = DEFAULT_POWER):
    p_t = np.asarray(p_t_w, dtype=float)
    if np.any(p_t <= 0):
        raise ValueError("transmit power must be positive")
    out = np.asarray(n_gnb) * model.p_ps_w + p_t / model.pae + model.p_fixed_w
    return out if out.ndim else float(out)


def sweep_energy(n_gnb: int, p_t_w: float, timing: BurstTiming, n_ss: int, t_ss_s: float,
                 model: PowerModel = DEFAULT_POWER) -> EnergyReport:
    """Energy of one full SSB sweep and the average SSB transmit power."""
    p = gnb_power(n_gnb, p_t_w, model)
    return EnergyReport(
        p_gnb_w=p,
        e_c_j=sector_count(n_gnb) * p * timing.t_ssb_s,
        p_c_w=p * timing.t_ssb_s * n_ss / t_ss_s,
    )


def energy_arrays(n_gnb, p_t_w, t_ssb_s: float, n_ss: int, t_ss_s: float, model: PowerModel = DEFAULT_POWER):
    """Vectorised ``(E_C, P_C)`` for arrays of operating points."""
    n = np.asarray(n_gnb, dtype=np.int64)
    s_d = np.array([sector_count(int(x)) for x in n.ravel()], dtype=float).reshape(n.shape)
    p = gnb_power(n, p_t_w, model)
    return s_d * p * t_ssb_s, p * t_ssb_s * n_ss / t_ss_s


def energy_lower_bound(n_gnb, p_t_w, t_ssb_s: float, model: PowerModel = DEFAULT_POWER):
    """3 T_SSB N (P_t/eta + N P_PS + P_RF'), valid because ceil(pi N) >= 3N."""
    n = np.asarray(n_gnb, dtype=float)
    return 3.0 * t_ssb_s * n * (np.asarray(p_t_w) / model.pae + n * model.p_ps_w + model.p_fixed_w)
