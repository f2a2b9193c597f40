"""Experiment configuration, unit conversions and UE sampling."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng

SSB_PER_BURST_CHOICES = (8, 16, 32, 64)
BURST_PERIOD_CHOICES_S = (5e-3, 10e-3, 20e-3, 40e-3, 80e-3, 160e-3)
FADING_MODES = ("per_iteration", "per_candidate")

# RMa shadow-fading standard deviations (TR 38.901 Table 7.4.1-1), dB.
SHADOW_STD_LOS_DB = 4.0
SHADOW_STD_NLOS_DB = 8.0


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def dbm_to_watt(p_dbm):
    if np.ndim(p_dbm):
        return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((float(p_dbm) - 30.0) / 10.0)


def watt_to_dbm(p_w):
    p = np.asarray(p_w, dtype=float)
    if np.any(p <= 0) or np.any(np.isnan(p)):
        raise ValueError("power must be positive to express in dBm")
    out = 10.0 * np.log10(p) + 30.0
    return out if np.ndim(p_w) else float(out)


def db_to_linear(x_db):
    if np.ndim(x_db):
        return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return 10.0 ** (float(x_db) / 10.0)


def linear_to_db(x):
    x = np.asarray(x, dtype=float)
    out = 10.0 * np.log10(x)
    return out if out.ndim else float(out)


def _snap_burst_period(value: float, key: str) -> float:
    for choice in BURST_PERIOD_CHOICES_S:
        if math.isclose(value, choice, rel_tol=1e-9, abs_tol=0.0):
            return choice
    raise ConfigError(key, f"{value!r} s is not one of {list(BURST_PERIOD_CHOICES_S)}")


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully specified experiment. Defaults are the baseline deployment."""

    cell_radius_m: float = 100.0
    gnb_height_m: float = 35.0
    ue_height_m: float = 1.5
    num_ues: int = 50
    ue_speed_mps: float = 1.0
    carrier_hz: float = 28e9
    bandwidth_hz: float = 50e6
    noise_psd_dbm_hz: float = -174.0
    numerology: int = 4
    max_tx_power_dbm: float = 18.0
    snr_threshold_db: float = 7.0
    misdetection_prob: float = 0.0
    n_ss: int = 8
    t_ss_s: float = 20e-3
    mc_iterations: int = 100_000
    master_seed: int = 0
    shadowing_enabled: bool = False
    fading_mode: str = "per_iteration"
    building_height_m: float = 5.0
    street_width_m: float = 20.0

    def __post_init__(self):
        self._validate()

    def _validate(self):
        def positive(name):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be > 0, got {getattr(self, name)!r}")

        for name in ("cell_radius_m", "carrier_hz", "bandwidth_hz", "building_height_m", "street_width_m"):
            positive(name)
        if not self.ue_height_m >= 0:
            raise ConfigError("ue_height_m", "must be >= 0")
        if not self.gnb_height_m > self.ue_height_m:
            raise ConfigError("gnb_height_m", "must exceed ue_height_m")
        for name in ("num_ues", "mc_iterations"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if isinstance(self.numerology, bool) or not isinstance(self.numerology, (int, np.integer)) or not 0 <= self.numerology <= 6:
            raise ConfigError("numerology", f"must be an integer in [0, 6], got {self.numerology!r}")
        if not self.ue_speed_mps >= 0:
            raise ConfigError("ue_speed_mps", "must be >= 0")
        if not 0.0 <= self.misdetection_prob <= 1.0:
            raise ConfigError("misdetection_prob", "must lie in [0, 1]")
        if self.n_ss not in SSB_PER_BURST_CHOICES or isinstance(self.n_ss, bool):
            raise ConfigError("n_ss", f"{self.n_ss!r} is not one of {list(SSB_PER_BURST_CHOICES)}")
        object.__setattr__(self, "t_ss_s", _snap_burst_period(float(self.t_ss_s), "t_ss_s"))
        if self.fading_mode not in FADING_MODES:
            raise ConfigError("fading_mode", f"{self.fading_mode!r} is not one of {list(FADING_MODES)}")
        if not isinstance(self.shadowing_enabled, bool):
            raise ConfigError("shadowing_enabled", "must be a boolean")
        for name in ("noise_psd_dbm_hz", "max_tx_power_dbm", "snr_threshold_db"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        object.__setattr__(self, "master_seed", int(self.master_seed) & ((1 << 64) - 1))

    # derived SI quantities
    @property
    def max_tx_power_w(self) -> float:
        return dbm_to_watt(self.max_tx_power_dbm)

    @property
    def snr_threshold(self) -> float:
        return db_to_linear(self.snr_threshold_db)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_psd_dbm_hz) * self.bandwidth_hz

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        kwargs = {}
        for key, value in data.items():
            expected = type(getattr(cls(), key))
            if expected is bool:
                if not isinstance(value, bool):
                    raise ConfigError(key, f"expected a boolean, got {value!r}")
            elif expected is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(key, f"expected an integer, got {value!r}")
            elif expected is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(key, f"expected a number, got {value!r}")
                value = float(value)
            elif expected is str and not isinstance(value, str):
                raise ConfigError(key, f"expected a string, got {value!r}")
            kwargs[key] = value
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (defaults applied)."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(data)


@dataclass(frozen=True)
class UeSample:
    phi_rad: float
    dist2d_m: float
    dist3d_m: float
    fading_los: float
    fading_nlos: float
    shadow_los_db: float = 0.0
    shadow_nlos_db: float = 0.0


@dataclass(frozen=True)
class Population:
    """Vectorised UE draws for one iteration; arrays have length ``num_ues``."""

    phi_rad: np.ndarray
    dist2d_m: np.ndarray
    dist3d_m: np.ndarray
    fading_los: np.ndarray
    fading_nlos: np.ndarray
    shadow_los_db: np.ndarray
    shadow_nlos_db: np.ndarray
    states: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.phi_rad)

    def ue(self, k: int) -> UeSample:
        return UeSample(
            float(self.phi_rad[k]),
            float(self.dist2d_m[k]),
            float(self.dist3d_m[k]),
            float(self.fading_los[k]),
            float(self.fading_nlos[k]),
            float(self.shadow_los_db[k]),
            float(self.shadow_nlos_db[k]),
        )


def distance_from_uniform(u, radius):
    """Inverse CDF of the uniform-in-disc radial law, density 2x/R^2."""
    return radius * np.sqrt(u)


def dist3d(config: ScenarioConfig, dist2d_m):
    dh = config.gnb_height_m - config.ue_height_m
    return np.sqrt(dh * dh + np.asarray(dist2d_m, dtype=float) ** 2)


def fading_slots(candidate: int) -> tuple[int, int]:
    """Slots holding the (LoS, NLoS) fading draw used for antenna count ``candidate``."""
    base = rng.SLOT_FADING + 2 * (candidate - 1)
    return base, base + 1


def sample_population(config: ScenarioConfig, iteration: int, num_ues: int | None = None,
                      candidate: int = 1) -> Population:
    """Draw every UE of one Monte Carlo iteration.

    UE ``k`` only ever reads its own substream, so the first ``k`` UEs are the
    same whatever ``num_ues`` is. ``candidate`` picks which fading draw is
    reported (only meaningful for ``fading_mode="per_candidate"``).
    """
    k = config.num_ues if num_ues is None else num_ues
    return _sample(config, iteration, np.arange(k), candidate)


def sample_ue(config: ScenarioConfig, iteration: int, ue: int, candidate: int = 1) -> UeSample:
    """Single-UE draw; identical to row ``ue`` of :func:`sample_population`."""
    return _sample(config, iteration, np.array([ue]), candidate).ue(0)


def _sample(config, iteration, ues, candidate):
    states = rng.stream_states(config.master_seed, iteration, ues)
    phi = 2.0 * np.pi * rng.uniforms_at(states, rng.SLOT_PHI)
    # 1 - u lies in (0, 1], so d = 0 cannot be drawn
    d2 = distance_from_uniform(1.0 - rng.uniforms_at(states, rng.SLOT_DIST), config.cell_radius_m)
    if config.fading_mode == "per_iteration":
        candidate = 1
    s_l, s_n = fading_slots(candidate)
    h_l = rng.exponential_from_uniform(rng.uniforms_at(states, s_l))
    h_n = rng.exponential_from_uniform(rng.uniforms_at(states, s_n))
    if config.shadowing_enabled:
        z_l, z_n = rng.normal_pair_from_uniforms(
            rng.uniforms_at(states, rng.SLOT_SHADOW), rng.uniforms_at(states, rng.SLOT_SHADOW + 1)
        )
        sh_l, sh_n = SHADOW_STD_LOS_DB * z_l, SHADOW_STD_NLOS_DB * z_n
    else:
        sh_l = sh_n = np.zeros(len(ues))
    return Population(phi, d2, dist3d(config, d2), h_l, h_n, sh_l, sh_n, states)
