"""Counter-based random streams usable from numba kernels.

Every stream is keyed by integers (seed, node id, walk index ...) so a
kernel's output does not depend on scheduling order. The mixer is
SplitMix64; ``RNG_ALGORITHM`` is recorded in result metadata.
"""

import numba as nb
import numpy as np

RNG_ALGORITHM = "splitmix64-counter (kernels) / PCG64 (numpy.random.Generator)"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def stream_key(a, b, c):
    """Derive a 64-bit stream state from three integer keys."""
    h = mix64(np.uint64(a) + _GOLDEN)
    h = mix64(h ^ (np.uint64(b) + _GOLDEN))
    return mix64(h ^ (np.uint64(c) + _GOLDEN))


@nb.njit(cache=True, inline="always")
def next_u64(state):
    # state is a length-1 uint64 array advanced in place
    state[0] += _GOLDEN
    return mix64(state[0])


@nb.njit(cache=True, inline="always")
def next_float(state):
    return np.float64(next_u64(state) >> _S11) * _INV53


@nb.njit(cache=True, inline="always")
def next_below(state, n):
    return np.int64(next_float(state) * n)


def seed_to_int(seed) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF
