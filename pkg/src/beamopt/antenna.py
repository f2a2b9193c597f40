"""Uniform linear array: codebook geometry and array-factor gain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_ANTENNAS = 64
TWO_PI = 2.0 * math.pi
# pi to 40 digits; exact enough that ceil(pi*N) never depends on float rounding
_PI = Fraction("3.1415926535897932384626433832795028841971")
_SING_TOL = 1e-12


class DomainError(ValueError):
    pass


def _check_n(n_gnb):
    if isinstance(n_gnb, bool) or int(n_gnb) != n_gnb or not 1 <= n_gnb <= MAX_ANTENNAS:
        raise DomainError(f"n_gnb must be an integer in [1, {MAX_ANTENNAS}], got {n_gnb!r}")
    return int(n_gnb)


def sector_count(n_gnb: int) -> int:
    """Number of SSB directions needed for a full azimuth sweep, ceil(pi*N)."""
    n = _check_n(n_gnb)
    return math.ceil(_PI * n)


def beamwidth(n_gnb: int) -> float:
    return 2.0 / n_gnb


def fnbw(n_gnb: int) -> float:
    """First-null beamwidth 2*asin(2/N); undefined for a single element."""
    n = _check_n(n_gnb)
    if n < 2:
        raise DomainError("first-null beamwidth needs n_gnb >= 2")
    return 2.0 * math.asin(2.0 / n)


@dataclass(frozen=True)
class BeamConfig:
    n_gnb: int
    delta_3db_rad: float
    sector_count: int
    fnbw_rad: float | None
    boresights_rad: tuple

    @classmethod
    def build(cls, n_gnb: int) -> "BeamConfig":
        n = _check_n(n_gnb)
        s_d = sector_count(n)
        delta = beamwidth(n)
        return cls(
            n_gnb=n,
            delta_3db_rad=delta,
            sector_count=s_d,
            fnbw_rad=fnbw(n) if n >= 2 else None,
            boresights_rad=tuple(m * delta for m in range(s_d)),
        )

    @property
    def seam_slack_rad(self) -> float:
        """How far the codebook's nominal coverage overshoots 2*pi."""
        return self.sector_count * self.delta_3db_rad - TWO_PI


def array_gain(n_gnb, theta_rad):
    """|sin(pi*N/2*sin t) / sin(pi/2*sin t)|, with the 0/0 points set to N."""
    theta = np.asarray(theta_rad, dtype=float)
    x = 0.5 * np.pi * np.sin(theta)
    den = np.sin(x)
    num = np.sin(n_gnb * x)
    singular = np.abs(den) < _SING_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.abs(num / np.where(singular, 1.0, den))
    g = np.where(singular, float(n_gnb), g)
    return g if g.ndim else float(g)


def nearest_beam(phi_rad, delta, s_d):
    """0-based nearest boresight index and signed offset, with wraparound.

    Ties go to the lower index; on the 2*pi seam beam 0 counts as lower than
    the last beam.
    """
    phi = np.asarray(phi_rad, dtype=float)
    m = np.ceil(phi / delta - 0.5)
    m = np.clip(m, 0, s_d - 1)
    offset = phi - m * delta
    to_first = TWO_PI - phi
    wrap = (m == s_d - 1) & (to_first <= np.abs(offset))
    m = np.where(wrap, 0, m).astype(np.int64)
    offset = np.where(wrap, phi - TWO_PI, offset)
    return m, offset


def initial_beam_and_offset(phi_rad: float, beams: BeamConfig) -> tuple[int, float]:
    """1-based serving beam index and initial offset theta_i = phi - boresight."""
    if not 0.0 <= phi_rad < TWO_PI:
        raise DomainError("phi_rad must lie in [0, 2*pi)")
    m, off = nearest_beam(phi_rad, beams.delta_3db_rad, beams.sector_count)
    return int(m) + 1, float(off)
