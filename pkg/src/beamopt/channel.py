"""Link budget: RMa LoS probability and path loss, and the SNR factor gamma_k.

The RMa model is used at 28 GHz although TR 38.901 quotes it up to 7 GHz;
this mirrors the deployment being reproduced and is not a modelling
recommendation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig, UeSample, db_to_linear, dbm_to_watt

SPEED_OF_LIGHT = 299_792_458.0
UE_GAIN = 1.0  # single isotropic antenna


@dataclass(frozen=True)
class LinkBudget:
    gamma_per_watt: float
    pl_los_db: float
    pl_nlos_db: float
    p_los: float
    noise_w: float
    gain_gnb: float
    gain_ue: float = UE_GAIN


def los_probability(dist2d_m):
    """RMa LoS probability: 1 up to 10 m, then exp(-(d - 10)/1000)."""
    d = np.asarray(dist2d_m, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    p = np.where(d <= 10.0, 1.0, np.exp(-(d - 10.0) / 1000.0))
    return p if p.ndim else float(p)


def breakpoint_distance(config: ScenarioConfig) -> float:
    return 2.0 * math.pi * config.gnb_height_m * config.ue_height_m * config.carrier_hz / SPEED_OF_LIGHT


def _pl1(d3, fc_ghz, h):
    return (
        20.0 * np.log10(40.0 * np.pi * d3 * fc_ghz / 3.0)
        + min(0.03 * h**1.72, 10.0) * np.log10(d3)
        - min(0.044 * h**1.72, 14.77)
        + 0.002 * np.log10(h) * d3
    )


def path_loss_los_db(dist3d_m, config: ScenarioConfig):
    d3 = np.asarray(dist3d_m, dtype=float)
    if np.any(d3 <= 0):
        raise ValueError("3D distance must be positive")
    fc = config.carrier_hz / 1e9
    h = config.building_height_m
    d_bp = breakpoint_distance(config)
    pl = _pl1(d3, fc, h)
    # second slope only matters beyond ~30 km at the default geometry
    far = d3 > d_bp
    if np.any(far):
        pl = np.where(far, _pl1(d_bp, fc, h) + 40.0 * np.log10(np.maximum(d3, d_bp) / d_bp), pl)
    return pl if pl.ndim else float(pl)


def path_loss_nlos_db(dist3d_m, config: ScenarioConfig):
    d3 = np.asarray(dist3d_m, dtype=float)
    if np.any(d3 <= 0):
        raise ValueError("3D distance must be positive")
    h, w = config.building_height_m, config.street_width_m
    h_bs, h_ut = config.gnb_height_m, config.ue_height_m
    pl_prime = (
        161.04
        - 7.1 * np.log10(w)
        + 7.5 * np.log10(h)
        - (24.37 - 3.7 * (h / h_bs) ** 2) * np.log10(h_bs)
        + (43.42 - 3.1 * np.log10(h_bs)) * (np.log10(d3) - 3.0)
        + 20.0 * np.log10(config.carrier_hz / 1e9)
        - (3.2 * np.log10(11.75 * h_ut) ** 2 - 4.97)
    )
    pl = np.maximum(path_loss_los_db(d3, config), pl_prime)
    return pl if pl.ndim else float(pl)


def path_loss_db(dist3d_m, link: str, config: ScenarioConfig):
    if link.lower() in ("los", "l"):
        return path_loss_los_db(dist3d_m, config)
    if link.lower() in ("nlos", "n"):
        return path_loss_nlos_db(dist3d_m, config)
    raise ValueError(f"unknown link state {link!r}")


def link_coefficients(dist2d_m, dist3d_m, config: ScenarioConfig, shadow_los_db=0.0, shadow_nlos_db=0.0):
    """Per-UE weights ``(a, b)`` with gamma = (a*|h_L|^2 + b*|h_N|^2) * G_gNB.

    ``a = P_r / (PL_L * N0 B)`` and ``b = (1 - P_r) / (PL_N * N0 B)``, with
    shadowing folded into the path loss. Splitting the fading out lets the
    solver redraw it per candidate antenna count without recomputing losses.
    """
    p_los = los_probability(dist2d_m)
    noise = config.noise_w / UE_GAIN
    a = p_los / (db_to_linear(np.asarray(path_loss_los_db(dist3d_m, config)) + shadow_los_db) * noise)
    b = (1.0 - p_los) / (db_to_linear(np.asarray(path_loss_nlos_db(dist3d_m, config)) + shadow_nlos_db) * noise)
    return a, b


def snr_factor(ue: UeSample, gain_gnb: float, config: ScenarioConfig) -> LinkBudget:
    """gamma_k such that the received SNR is ``P_t * gamma_k``."""
    if gain_gnb < 0:
        raise ValueError("beamforming gain must be non-negative")
    pl_l = path_loss_los_db(ue.dist3d_m, config) + ue.shadow_los_db
    pl_n = path_loss_nlos_db(ue.dist3d_m, config) + ue.shadow_nlos_db
    p_r = los_probability(ue.dist2d_m)
    noise = dbm_to_watt(config.noise_psd_dbm_hz) * config.bandwidth_hz
    h_l = ue.fading_los / db_to_linear(pl_l)
    h_n = ue.fading_nlos / db_to_linear(pl_n)
    gamma = (h_l * p_r + h_n * (1.0 - p_r)) * gain_gnb * UE_GAIN / noise
    return LinkBudget(float(gamma), float(pl_l), float(pl_n), float(p_r), float(noise), float(gain_gnb))
