"""JIT-compiled trajectory kernels (the default backend).

Each kernel mirrors its pure-numpy twin in ``_kernels_numpy`` draw for draw;
the two backends produce bit-identical outputs.  All uint64 arithmetic is
kept strictly in uint64 to avoid numba's implicit float promotion.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._rng import GOLDEN, MIX_A, MIX_B, INV_2_53

_U1 = np.uint64(1)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * MIX_A
    z = (z ^ (z >> np.uint64(27))) * MIX_B
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _uniform(origin, t):
    bits = _mix64(origin + (t + _U1) * GOLDEN)
    return np.float64(bits >> np.uint64(11)) * INV_2_53


@njit(cache=True)
def _origin(master, k):
    return _mix64(master + (k + _U1) * GOLDEN)


@njit(cache=True)
def _step(cum, last_idx, state, u):
    # Inverse CDF over ascending target index: first j with cum[state, j] > u.
    row = cum[state]
    j = 0
    n = row.shape[0]
    while j < n and row[j] <= u:
        j += 1
    if j > last_idx[state]:
        j = last_idx[state]
    return j


@njit(cache=True)
def until_statuses(cum, last_idx, initial, target_mask, avoid_mask, n_paths, max_steps, master):
    """Status per path: 1 target reached first, 2 avoid entered first, 0 censored."""
    statuses = np.zeros(n_paths, dtype=np.int8)
    for k in range(n_paths):
        if target_mask[initial] != 0:
            statuses[k] = 1
            continue
        if avoid_mask[initial] != 0:
            statuses[k] = 2
            continue
        origin = _origin(master, np.uint64(k))
        state = initial
        for t in range(max_steps):
            u = _uniform(origin, np.uint64(t))
            state = _step(cum, last_idx, state, u)
            if target_mask[state] != 0:
                statuses[k] = 1
                break
            if avoid_mask[state] != 0:
                statuses[k] = 2
                break
    return statuses


@njit(cache=True)
def next_hits(cum, last_idx, from_state, target_mask, n_draws, master):
    """One-step frequency: hit flag per draw, all draws on substream 0."""
    hits = np.zeros(n_draws, dtype=np.int8)
    origin = _origin(master, np.uint64(0))
    for t in range(n_draws):
        u = _uniform(origin, np.uint64(t))
        state = _step(cum, last_idx, from_state, u)
        if target_mask[state] != 0:
            hits[t] = 1
    return hits


@njit(cache=True)
def occupancy_sums(cum, last_idx, initial, state_values, trans_values, horizon, burn_in, n_reps, master):
    """Per-replication accumulated reward over steps burn_in..horizon-1."""
    sums = np.zeros(n_reps, dtype=np.float64)
    for r in range(n_reps):
        origin = _origin(master, np.uint64(r))
        state = initial
        acc = 0.0
        for t in range(horizon):
            u = _uniform(origin, np.uint64(t))
            nxt = _step(cum, last_idx, state, u)
            if t >= burn_in:
                acc += state_values[state] + trans_values[state, nxt]
            state = nxt
        sums[r] = acc
    return sums


@njit(cache=True)
def reward_until_target(cum, last_idx, initial, target_mask, state_values, trans_values,
                        n_paths, max_steps, master):
    """Accumulated reward per path until first target entry; status 1 hit / 0 censored."""
    totals = np.zeros(n_paths, dtype=np.float64)
    statuses = np.zeros(n_paths, dtype=np.int8)
    for k in range(n_paths):
        if target_mask[initial] != 0:
            statuses[k] = 1
            continue
        origin = _origin(master, np.uint64(k))
        state = initial
        acc = 0.0
        for t in range(max_steps):
            u = _uniform(origin, np.uint64(t))
            nxt = _step(cum, last_idx, state, u)
            acc += state_values[state] + trans_values[state, nxt]
            state = nxt
            if target_mask[state] != 0:
                statuses[k] = 1
                break
        totals[k] = acc
    return totals, statuses
