"""Counter-based random substreams.

Every random number in a run is a pure function of
``(master_seed, iteration, ue, slot)``: the substream for one UE in one
Monte Carlo iteration is a SplitMix64 sequence whose state is derived by
hashing the seed with the two indices, and ``slot`` addresses a position in
that sequence directly. Nothing is consumed sequentially, so draws do not
depend on worker count, evaluation order, ``K`` or how far an ``N_gNB`` scan
got before stopping.

Slot layout per (iteration, UE)::

    0      azimuth
    1      distance
    2, 3   shadowing (one Box-Muller pair)
    4 + 2*(n-1), 5 + 2*(n-1)
           LoS / NLoS fading for candidate antenna count n (n = 1..64)
"""

import numpy as np

from ._accel import njit

SLOT_PHI = 0
SLOT_DIST = 1
SLOT_SHADOW = 2
SLOT_FADING = 4

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ITER_MUL = np.uint64(0xD1B54A32D192ED03)
_UE_MUL = np.uint64(0xAEF17502108EF2D9)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

_MASK64 = (1 << 64) - 1


def as_seed(seed) -> np.uint64:
    """Reduce any Python integer to the 64-bit seed space."""
    return np.uint64(int(seed) & _MASK64)


@njit
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def stream_state(seed, iteration, ue):
    k = _mix(seed + _GOLDEN)
    k = _mix(k ^ (np.uint64(iteration) * _ITER_MUL))
    return _mix(k ^ (np.uint64(ue) * _UE_MUL))


@njit
def uniform_at(state, slot):
    """Uniform on [0, 1) with 53 random bits."""
    z = _mix(state + (np.uint64(slot) + _ONE) * _GOLDEN)
    return np.float64(z >> _S11) * _INV53


# -- numpy mirror -----------------------------------------------------------


def _mix_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_states(seed, iterations, ues):
    """Broadcasting version of :func:`stream_state` over index arrays."""
    seed = as_seed(seed)
    it = np.asarray(iterations, dtype=np.uint64)
    ue = np.asarray(ues, dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = _mix_np(np.atleast_1d(seed + _GOLDEN))
        k = _mix_np(k ^ (it * _ITER_MUL))
        return _mix_np(k ^ (ue * _UE_MUL))


def uniforms_at(states, slots):
    states = np.asarray(states, dtype=np.uint64)
    slots = np.asarray(slots, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix_np(states + (slots + _ONE) * _GOLDEN)
    return (z >> _S11).astype(np.float64) * _INV53


def exponential_from_uniform(u):
    """Unit-mean exponential by inversion; ``u`` in [0, 1)."""
    return -np.log1p(-np.asarray(u, dtype=np.float64))


def normal_pair_from_uniforms(u1, u2):
    """Box-Muller transform; returns two independent standard normals."""
    r = np.sqrt(-2.0 * np.log1p(-np.asarray(u1, dtype=np.float64)))
    t = 2.0 * np.pi * np.asarray(u2, dtype=np.float64)
    return r * np.cos(t), r * np.sin(t)
