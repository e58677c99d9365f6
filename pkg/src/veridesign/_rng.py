"""Counter-based SplitMix64 random numbers shared by both simulation backends.

Draw ``t`` of substream ``k`` under a master seed is::

    origin(k) = mix64(master + (k+1) * GOLDEN)
    value(k, t) = mix64(origin(k) + (t+1) * GOLDEN)
    uniform(k, t) = (value(k, t) >> 11) * 2**-53        # in [0, 1)

All arithmetic is modulo 2**64.  Each simulated path or replication owns one
substream, so path draws are reproducible independently of scheduling, and
the numba and numpy backends produce bit-identical streams.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX_A = np.uint64(0xBF58476D1CE4E5B9)
MIX_B = np.uint64(0x94D049BB133111EB)
INV_2_53 = 2.0 ** -53

_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_ONE = np.uint64(1)


def mix64(z):
    """SplitMix64 finalizer; elementwise on uint64 scalars or arrays."""
    z = (z ^ (z >> _SH30)) * MIX_A
    z = (z ^ (z >> _SH27)) * MIX_B
    return z ^ (z >> _SH31)


def as_seed(seed: int) -> np.uint64:
    return np.uint64(seed & 0xFFFFFFFFFFFFFFFF)


def stream_origins(master: np.uint64, n: int, first: int = 0) -> np.ndarray:
    """Origins of substreams ``first .. first+n-1``."""
    k = np.arange(first, first + n, dtype=np.uint64)
    return mix64(master + (k + _ONE) * GOLDEN)


def uniforms(origin, t):
    """Uniform draws; ``origin`` and ``t`` broadcast (t is the 0-based draw index)."""
    t = np.asarray(t, dtype=np.uint64)
    bits = mix64(origin + (t + _ONE) * GOLDEN)
    return (bits >> _SH11).astype(np.float64) * INV_2_53


def child_seed(seed: int, index: int) -> int:
    """Derive an independent master seed, used for composite estimates."""
    master = as_seed(seed)
    return int(mix64(master + np.uint64(index + 1) * GOLDEN))
