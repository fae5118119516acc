"""Deterministic counter-based sample streams.

Every random number is a pure hash of (seed, pixel index, sample index,
dimension), so the stream is identical no matter which worker evaluates it
or in what order: the render loop is embarrassingly parallel yet bitwise
reproducible.

Dimension blocks per path segment keep camera walks, light walks, and
subpath connections from ever sharing a counter.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

GOLDEN = uint64(0x9E3779B97F4A7C15)
INV_2_53 = 1.0 / 9007199254740992.0

# dimension layout (per path segment index s, block of 16):
#   s*16 + 0,1  : bsdf / pixel-jitter pair
#   s*16 + 2    : lobe selection
#   s*16 + 3    : russian roulette
#   s*16 + 4..6 : emitter pick + area sample
DIM_BLOCK = 16
DIM_LIGHT_WALK = 4096      # light-subpath dimensions start here
DIM_CONNECT = 8192         # per-strategy connection dimensions start here


@njit(cache=True, nogil=True, inline="always")
def mix64(x):
    x = uint64(x)
    x = (x ^ (x >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> uint64(27))) * uint64(0x94D049BB133111EB)
    return x ^ (x >> uint64(31))


@njit(cache=True, nogil=True)
def stream_base(seed, pixel_index, sample_index):
    """Stream identity for one (pixel, sample) pair under a render seed."""
    z = mix64(uint64(seed) + GOLDEN)
    z = mix64(z ^ (uint64(pixel_index) + GOLDEN))
    z = mix64(z ^ (uint64(sample_index) + GOLDEN))
    return z


@njit(cache=True, nogil=True, inline="always")
def rng_float(base, dim):
    """dim-th uniform in [0, 1) of the stream."""
    h = mix64(uint64(base) + uint64(dim) * GOLDEN)
    return float(h >> uint64(11)) * INV_2_53


def stream_floats(seed: int, pixel_index: int, sample_index: int, dims) -> np.ndarray:
    """Python-facing helper: evaluate several dimensions of one stream."""
    base = stream_base(seed, pixel_index, sample_index)
    return np.array([rng_float(base, int(d)) for d in np.atleast_1d(dims)])
