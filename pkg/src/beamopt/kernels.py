"""Hot loops: the per-iteration antenna-count scan.

``scan_cells`` evaluates one block of Monte Carlo iterations for several
sweep cells that share the same UE draws (cells differ in speed and burst
timing only). For every (cell, iteration) it returns the first antenna count
whose SNR condition holds and the back-solved transmit power, or 0 / NaN when
no count up to 64 works.

Two implementations share that contract: a numba kernel that walks UEs with
early exit, and a vectorised numpy version used when ``BEAMOPT_DISABLE_JIT``
is set. The random fading draws are bit-identical between them.
"""

from __future__ import annotations

import math

import numpy as np

from . import rng
from ._accel import USE_JIT, njit
from .antenna import MAX_ANTENNAS, TWO_PI, array_gain, beamwidth, nearest_beam, sector_count

_SING_TOL = 1e-12


@njit
def _gain(n, theta):
    x = 0.5 * math.pi * math.sin(theta)
    den = math.sin(x)
    if abs(den) < _SING_TOL:
        return float(n)
    return abs(math.sin(n * x) / den)


@njit
def _offset(phi, delta, s_d):
    m = math.ceil(phi / delta - 0.5)
    if m > s_d - 1:
        m = s_d - 1
    if m < 0:
        m = 0
    off = phi - m * delta
    if m == s_d - 1 and TWO_PI - phi <= abs(off):
        off = phi - TWO_PI
    return off


@njit
def _scan_cells_jit(states, phi, dist, coef_los, coef_nlos, speeds, t_bm, delta, s_d,
                    p_max, tau, need, per_candidate, alive, n_out, p_out):
    n_cells = speeds.shape[0]
    n_iter, k_ues = phi.shape
    n_max = delta.shape[0]
    allowed = k_ues - need
    gam = np.empty(k_ues)
    coef = np.empty((n_max, k_ues))
    for i in range(n_iter):
        # lazily filled table of fading-weighted link factors per candidate
        for n_idx in range(n_max):
            coef[n_idx, 0] = -1.0
        for c in range(n_cells):
            n_out[c, i] = 0
            p_out[c, i] = np.nan
            if not alive[c]:
                continue
            start = 0
            for n_idx in range(n_max):
                n = n_idx + 1
                row = n_idx if per_candidate else 0
                if coef[row, 0] < 0.0:
                    slot = rng.SLOT_FADING + 2 * row
                    for k in range(k_ues):
                        st = states[i, k]
                        h_l = -math.log1p(-rng.uniform_at(st, slot))
                        h_n = -math.log1p(-rng.uniform_at(st, slot + 1))
                        coef[row, k] = h_l * coef_los[i, k] + h_n * coef_nlos[i, k]
                rot = speeds[c] * t_bm[c, n_idx]
                fails = 0
                first_fail = -1
                # start from the UE that sank the previous candidate: the count
                # is order-free and that UE usually fails again
                for j in range(k_ues):
                    k = start + j
                    if k >= k_ues:
                        k -= k_ues
                    th = abs(_offset(phi[i, k], delta[n_idx], s_d[n_idx]) + rot / dist[i, k])
                    g = coef[row, k] * _gain(n, th)
                    gam[k] = g
                    if p_max * g < tau:
                        if first_fail < 0:
                            first_fail = k
                        fails += 1
                        if fails > allowed:
                            break
                if first_fail >= 0:
                    start = first_fail
                if fails <= allowed:
                    if need == k_ues:
                        q = gam.min()
                    else:
                        q = np.sort(gam)[k_ues - need]
                    n_out[c, i] = n
                    p_out[c, i] = tau / q
                    break


def _scan_cells_np(states, phi, dist, coef_los, coef_nlos, speeds, t_bm, delta, s_d,
                   p_max, tau, need, per_candidate, alive, n_out, p_out):
    n_cells = speeds.shape[0]
    n_iter, k_ues = phi.shape
    n_out[:] = 0
    p_out[:] = np.nan
    coef_cache = {}

    def coef_for(n_idx):
        key = n_idx if per_candidate else 0
        if key not in coef_cache:
            slot = rng.SLOT_FADING + 2 * key
            h_l = rng.exponential_from_uniform(rng.uniforms_at(states, slot))
            h_n = rng.exponential_from_uniform(rng.uniforms_at(states, slot + 1))
            coef_cache[key] = h_l * coef_los + h_n * coef_nlos
        return coef_cache[key]

    for c in range(n_cells):
        if not alive[c]:
            continue
        pending = np.ones(n_iter, dtype=bool)
        for n_idx in range(delta.shape[0]):
            if not pending.any():
                break
            rows = np.flatnonzero(pending)
            _, off = nearest_beam(phi[rows], delta[n_idx], s_d[n_idx])
            th = np.abs(off + speeds[c] * t_bm[c, n_idx] / dist[rows])
            gam = coef_for(n_idx)[rows] * array_gain(n_idx + 1, th)
            ok = (p_max * gam >= tau).sum(axis=1) >= need
            if ok.any():
                acc = rows[ok]
                q = np.sort(gam[ok], axis=1)[:, k_ues - need]
                n_out[c, acc] = n_idx + 1
                p_out[c, acc] = tau / q
                pending[acc] = False


def scan_cells(states, phi, dist, coef_los, coef_nlos, speeds, t_bm, delta, s_d,
               p_max, tau, need, per_candidate, alive=None, use_jit=None):
    """Run the antenna-count scan for a block; see module docstring.

    ``states``, ``phi``, ``dist``, ``coef_*`` are ``(iterations, K)``;
    ``speeds`` is ``(cells,)``, ``t_bm`` is ``(cells, 64)`` and ``delta`` /
    ``s_d`` are ``(64,)`` codebook tables. Returns ``(n_star, p_star)`` each
    shaped ``(cells, iterations)``.
    """
    n_cells = len(speeds)
    n_iter = phi.shape[0]
    if alive is None:
        alive = np.ones(n_cells, dtype=np.bool_)
    n_out = np.zeros((n_cells, n_iter), dtype=np.int64)
    p_out = np.full((n_cells, n_iter), np.nan)
    fn = _scan_cells_jit if (USE_JIT if use_jit is None else use_jit) else _scan_cells_np
    fn(
        np.ascontiguousarray(states, dtype=np.uint64),
        np.ascontiguousarray(phi, dtype=np.float64),
        np.ascontiguousarray(dist, dtype=np.float64),
        np.ascontiguousarray(coef_los, dtype=np.float64),
        np.ascontiguousarray(coef_nlos, dtype=np.float64),
        np.ascontiguousarray(speeds, dtype=np.float64),
        np.ascontiguousarray(t_bm, dtype=np.float64),
        np.ascontiguousarray(delta, dtype=np.float64),
        np.ascontiguousarray(s_d, dtype=np.int64),
        float(p_max),
        float(tau),
        int(need),
        bool(per_candidate),
        np.ascontiguousarray(alive, dtype=np.bool_),
        n_out,
        p_out,
    )
    return n_out, p_out


def codebook_tables(n_max: int = MAX_ANTENNAS):
    """Per-candidate beamwidth and beam count, indexed by N - 1."""
    ns = range(1, n_max + 1)
    return (np.array([beamwidth(n) for n in ns]), np.array([sector_count(n) for n in ns], dtype=np.int64))
